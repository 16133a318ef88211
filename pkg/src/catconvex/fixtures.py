"""Ready-made scenes: convex unions, counterexamples, and invalid inputs.

These builders back the test-suite and double as CLI examples.  Flat
polygons are triangulated or split into overlapping rectangles; spherical
and hyperbolic polygons are glued from cells bounded by geodesic
hyperplanes through the origin; circle scenes cover arcs of the equator
of the unit sphere with sub-hemisphere caps.
"""

from __future__ import annotations

import math

import numpy as np

from .convex_scenes import ConvexCell, HalfSpace, Scene, check_scene_structure
from .model_spaces import ModelSpace

__all__ = [
    "hexagon_scene",
    "rectangle_scene",
    "l_shape_scene",
    "overlapping_disks_scene",
    "spherical_cap_scene",
    "spherical_polygon_scene",
    "hyperbolic_polygon_scene",
    "great_circle_scene",
    "circle_arc_scene",
    "octant_scene",
    "disjoint_caps_scene",
    "super_hemisphere_scene",
]


def _scene(space: ModelSpace, cells, eps_hint=None, membership_tol=1e-9, check=True) -> Scene:
    scene = Scene(
        space=space,
        cells=tuple(cells),
        membership_tol=membership_tol,
        eps_hint=eps_hint,
    )
    if check:
        check_scene_structure(scene)
    return scene


def _flat_polygon_cell(vertices: np.ndarray) -> ConvexCell:
    """Convex planar polygon as the intersection of its edge half-planes."""
    vertices = np.asarray(vertices, dtype=float)
    centroid = vertices.mean(axis=0)
    halfspaces = []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        edge = q - p
        normal = np.array([-edge[1], edge[0]])
        if np.dot(normal, centroid - p) < 0:
            normal = -normal
        halfspaces.append(HalfSpace.of(normal, float(np.dot(normal, p))))
    return ConvexCell(halfspaces=tuple(halfspaces))


def _spherical_triangle_cell(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> ConvexCell:
    """Spherical triangle bounded by great circles through vertex pairs."""
    halfspaces = []
    for a, b, c in ((p, q, r), (q, r, p), (r, p, q)):
        normal = np.cross(a, b)
        if np.dot(normal, c) < 0:
            normal = -normal
        halfspaces.append(HalfSpace.of(normal, 0.0))
    return ConvexCell(halfspaces=tuple(halfspaces))


def _hyperbolic_triangle_cell(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> ConvexCell:
    """Hyperbolic triangle bounded by geodesic planes through the origin.

    The covector of the plane spanned by two hyperboloid points is their
    Euclidean cross product: it annihilates both under the plain dot
    product used for membership.
    """
    halfspaces = []
    for a, b, c in ((p, q, r), (q, r, p), (r, p, q)):
        normal = np.cross(a, b)
        if np.dot(normal, c) < 0:
            normal = -normal
        halfspaces.append(HalfSpace.of(normal, 0.0))
    return ConvexCell(halfspaces=tuple(halfspaces))


# -- flat fixtures -------------------------------------------------------------


def hexagon_scene() -> Scene:
    """Regular hexagon fan-triangulated into six cells (convex union)."""
    space = ModelSpace(kappa=0.0, dim=2)
    corners = np.array(
        [[math.cos(k * math.pi / 3.0), math.sin(k * math.pi / 3.0)] for k in range(6)]
    )
    center = np.zeros(2)
    cells = [
        _flat_polygon_cell(np.array([center, corners[k], corners[(k + 1) % 6]]))
        for k in range(6)
    ]
    return _scene(space, cells, eps_hint=2.0)


def rectangle_scene() -> Scene:
    """A 2 x 1 rectangle split into two overlapping squares."""
    space = ModelSpace(kappa=0.0, dim=2)
    left = _flat_polygon_cell(np.array([[0.0, 0.0], [1.2, 0.0], [1.2, 1.0], [0.0, 1.0]]))
    right = _flat_polygon_cell(np.array([[0.8, 0.0], [2.0, 0.0], [2.0, 1.0], [0.8, 1.0]]))
    return _scene(space, [left, right], eps_hint=2.0)


def l_shape_scene() -> Scene:
    """Two rectangles whose union has a reflex corner at (1, 1)."""
    space = ModelSpace(kappa=0.0, dim=2)
    horizontal = _flat_polygon_cell(np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]))
    vertical = _flat_polygon_cell(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0]]))
    return _scene(space, [horizontal, vertical], eps_hint=0.15)


def overlapping_disks_scene(n_sides: int = 48) -> tuple[Scene, np.ndarray]:
    """Union of two polygonal disks plus one corner of their lens overlap.

    The corner is a boundary crossing of the two polygons; the union's
    interior angle there exceeds pi, so local convexity fails at it.
    """
    space = ModelSpace(kappa=0.0, dim=2)
    centers = [np.array([0.0, 0.0]), np.array([1.2, 0.0])]
    cells = []
    for c in centers:
        ring = np.array(
            [
                c + [math.cos(2.0 * math.pi * k / n_sides), math.sin(2.0 * math.pi * k / n_sides)]
                for k in range(n_sides)
            ]
        )
        cells.append(_flat_polygon_cell(ring))
    scene = _scene(space, cells, eps_hint=0.15)
    corner = _polygon_boundary_crossing(scene, prefer_positive_y=True)
    return scene, corner


def _polygon_boundary_crossing(scene: Scene, prefer_positive_y: bool) -> np.ndarray:
    """Intersection point of the boundaries of the two cells of a scene."""
    c0, c1 = scene.cells
    best = None
    for i in range(len(c0.halfspaces)):
        n0 = np.array(c0.halfspaces[i].normal)
        o0 = c0.halfspaces[i].offset
        for j in range(len(c1.halfspaces)):
            n1 = np.array(c1.halfspaces[j].normal)
            o1 = c1.halfspaces[j].offset
            mat = np.array([n0, n1])
            if abs(np.linalg.det(mat)) < 1e-12:
                continue
            x = np.linalg.solve(mat, np.array([o0, o1]))
            if c0.margins(x[None, :])[0] < -1e-9 or c1.margins(x[None, :])[0] < -1e-9:
                continue
            if prefer_positive_y and x[1] <= 0:
                continue
            best = x
    if best is None:
        raise RuntimeError("no boundary crossing found")
    return best


# -- spherical fixtures ---------------------------------------------------------


def spherical_cap_scene(radius: float = 1.0) -> Scene:
    """Single cap of the unit sphere around (1, 0, 0); convex for radius <= pi/2."""
    space = ModelSpace(kappa=1.0, dim=2)
    cap = ConvexCell(halfspaces=(HalfSpace.of([1.0, 0.0, 0.0], math.cos(radius)),))
    return _scene(space, [cap], eps_hint=1.5)


def spherical_polygon_scene() -> Scene:
    """Convex spherical quadrilateral glued from two triangles along a diagonal."""
    space = ModelSpace(kappa=1.0, dim=2)
    center = np.array([1.0, 0.0, 0.0])
    t1 = np.array([0.0, 1.0, 0.0])
    t2 = np.array([0.0, 0.0, 1.0])
    r = 0.8
    verts = [
        space.exp(center, r * (math.cos(phi) * t1 + math.sin(phi) * t2))
        for phi in (math.pi / 4.0, 3.0 * math.pi / 4.0, 5.0 * math.pi / 4.0, 7.0 * math.pi / 4.0)
    ]
    cells = [
        _spherical_triangle_cell(verts[0], verts[1], verts[2]),
        _spherical_triangle_cell(verts[0], verts[2], verts[3]),
    ]
    return _scene(space, cells, eps_hint=1.5)


def octant_scene() -> Scene:
    """Positive octant of the unit sphere, a single spherical triangle."""
    space = ModelSpace(kappa=1.0, dim=2)
    cell = ConvexCell(
        halfspaces=(
            HalfSpace.of([1.0, 0.0, 0.0], 0.0),
            HalfSpace.of([0.0, 1.0, 0.0], 0.0),
            HalfSpace.of([0.0, 0.0, 1.0], 0.0),
        )
    )
    return _scene(space, [cell], eps_hint=1.5)


def great_circle_scene() -> Scene:
    """Full equator of the unit sphere as three overlapping arcs."""
    space = ModelSpace(kappa=1.0, dim=2)
    half = 0.45 * math.pi
    cells = []
    for k in range(3):
        c = 2.0 * math.pi * k / 3.0
        cells.append(
            ConvexCell(
                halfspaces=(
                    HalfSpace.of([0.0, 0.0, 1.0], 0.0),
                    HalfSpace.of([0.0, 0.0, -1.0], 0.0),
                    HalfSpace.of([math.cos(c), math.sin(c), 0.0], math.cos(half)),
                )
            )
        )
    return _scene(space, cells, eps_hint=1.5)


def circle_arc_scene(length: float, n_cells: int | None = None) -> Scene:
    """Arc of the equator from angle 0 to ``length``, split into sub-arcs.

    Consecutive sub-arcs meet in a single point, exercising measure-zero
    cell adjacency.  Each sub-arc stays strictly shorter than pi so its
    cap constraint keeps a nonnegative offset.
    """
    if not 0.0 < length < 2.0 * math.pi:
        raise ValueError(f"arc length must lie in (0, 2*pi), got {length}")
    space = ModelSpace(kappa=1.0, dim=2)
    if n_cells is None:
        n_cells = max(2, math.ceil(length / 2.5))
    piece = length / n_cells
    cells = []
    for k in range(n_cells):
        mid = (k + 0.5) * piece
        cells.append(
            ConvexCell(
                halfspaces=(
                    HalfSpace.of([0.0, 0.0, 1.0], 0.0),
                    HalfSpace.of([0.0, 0.0, -1.0], 0.0),
                    HalfSpace.of(
                        [math.cos(mid), math.sin(mid), 0.0], math.cos(piece / 2.0)
                    ),
                )
            )
        )
    return _scene(space, cells, eps_hint=1.5)


def disjoint_caps_scene() -> Scene:
    """Two antipodal caps: valid cells, but the scene is disconnected."""
    space = ModelSpace(kappa=1.0, dim=2)
    cells = [
        ConvexCell(halfspaces=(HalfSpace.of([1.0, 0.0, 0.0], math.cos(0.4)),)),
        ConvexCell(halfspaces=(HalfSpace.of([-1.0, 0.0, 0.0], math.cos(0.4)),)),
    ]
    return _scene(space, cells, eps_hint=0.3)


def super_hemisphere_scene(extra: float = 0.4) -> Scene:
    """Cap larger than a hemisphere: a nonconvex cell (structurally invalid,
    returned unchecked so validation can exhibit a witness)."""
    space = ModelSpace(kappa=1.0, dim=2)
    cap = ConvexCell(
        halfspaces=(HalfSpace.of([1.0, 0.0, 0.0], math.cos(math.pi / 2.0 + extra)),)
    )
    return _scene(space, [cap], eps_hint=0.3, check=False)


# -- hyperbolic fixtures --------------------------------------------------------


def hyperbolic_polygon_scene() -> Scene:
    """Convex hyperbolic quadrilateral glued from two geodesic triangles."""
    space = ModelSpace(kappa=-1.0, dim=2)
    base = space.base_point()
    r = 1.2
    verts = []
    for phi in (math.pi / 4.0, 3.0 * math.pi / 4.0, 5.0 * math.pi / 4.0, 7.0 * math.pi / 4.0):
        v = np.array([math.cos(phi), math.sin(phi), 0.0])
        verts.append(space.exp(base, r * v))
    cells = [
        _hyperbolic_triangle_cell(verts[0], verts[1], verts[2]),
        _hyperbolic_triangle_cell(verts[0], verts[2], verts[3]),
    ]
    return _scene(space, cells, eps_hint=1.5)
