"""Closed subsets of a model space as finite unions of convex cells.

A cell is an intersection of linear half-spaces in the embedding,
``{x : dot(normal, x) >= offset}`` with a plain dot product, intersected
with the model surface.  A scene is a finite union of such cells plus
tolerances; membership is exact up to ``membership_tol``.  On the sphere
every half-space must cut a cap no larger than a hemisphere
(``offset >= 0``) so that single cells are geodesically convex.

The module provides membership with signed margins, sampling-based scene
validation (per-cell convexity, connectedness of the cell graph), local
convexity checks with witnesses, and a graph approximation of the induced
length metric whose nodes cluster on cell interfaces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize as sciopt
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    DisconnectedSceneError,
    GeometryError,
    SceneError,
    SceneFormatError,
)
from .model_spaces import ModelSpace

__all__ = [
    "HalfSpace",
    "ConvexCell",
    "Scene",
    "LengthPath",
    "contains",
    "validate_scene",
    "local_convexity_check",
    "select_eps",
    "length_metric",
    "intrinsic_diameter",
    "SceneGraph",
    "scene_from_dict",
    "scene_to_dict",
    "check_scene_structure",
]

# Anchor points and adjacency decisions tolerate this much constraint
# violation; it must dominate the SLSQP stopping precision.
_SOLVER_SLACK = 1e-7


@dataclass(frozen=True)
class HalfSpace:
    """One linear constraint dot(normal, x) >= offset, normal unit length."""

    normal: tuple[float, ...]
    offset: float

    @classmethod
    def of(cls, normal, offset: float) -> "HalfSpace":
        vec = np.asarray(normal, dtype=float)
        norm = float(np.linalg.norm(vec))
        if not np.all(np.isfinite(vec)) or norm < 1e-15:
            raise SceneError(f"half-space normal must be nonzero, got {normal}")
        if not math.isfinite(offset):
            raise SceneError(f"half-space offset must be finite, got {offset}")
        return cls(normal=tuple(vec / norm), offset=float(offset) / norm)


@dataclass(frozen=True)
class ConvexCell:
    """Intersection of half-spaces with the model surface."""

    halfspaces: tuple[HalfSpace, ...]

    @cached_property
    def normal_matrix(self) -> np.ndarray:
        return np.array([h.normal for h in self.halfspaces], dtype=float)

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.array([h.offset for h in self.halfspaces], dtype=float)

    def slacks(self, points: np.ndarray) -> np.ndarray:
        """Signed slack of every constraint at every point, shape (k, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts @ self.normal_matrix.T - self.offsets

    def margins(self, points: np.ndarray) -> np.ndarray:
        """Per-point membership margin: min slack over the constraints."""
        return self.slacks(points).min(axis=1)


@dataclass(frozen=True)
class Scene:
    """Union of convex cells in one model space, with tolerances."""

    space: ModelSpace
    cells: tuple[ConvexCell, ...]
    membership_tol: float = 1e-9
    eps_hint: float | None = None

    def margins(self, points: np.ndarray) -> np.ndarray:
        """Scene margin per point: max over cells of the cell margin."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.full(pts.shape[0], -np.inf)
        for cell in self.cells:
            np.maximum(out, cell.margins(pts), out=out)
        return out

    def margin(self, p) -> float:
        return float(self.margins(np.asarray(p, dtype=float)[None, :])[0])

    def contains_point(self, p) -> bool:
        return self.margin(p) >= -self.membership_tol

    def cell_flags(self, points: np.ndarray) -> np.ndarray:
        """Boolean (k, n_cells) matrix of per-cell membership."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        flags = np.empty((pts.shape[0], len(self.cells)), dtype=bool)
        for j, cell in enumerate(self.cells):
            flags[:, j] = cell.margins(pts) >= -self.membership_tol
        return flags


def contains(scene: Scene, p) -> tuple[bool, float]:
    """Membership test with the signed margin actually measured."""
    point = scene.space.check_point(p)
    margin = scene.margin(point)
    return margin >= -scene.membership_tol, margin


def check_scene_structure(scene: Scene) -> None:
    """Cheap structural invariants, raised with the offending cell index."""
    if not scene.cells:
        raise SceneError("scene has no cells")
    if scene.membership_tol <= 0:
        raise SceneError(f"membership_tol must be positive: {scene.membership_tol}")
    if scene.eps_hint is not None and scene.eps_hint <= 0:
        raise SceneError(f"eps_hint must be positive: {scene.eps_hint}")
    m = scene.space.ambient_dim
    for i, cell in enumerate(scene.cells):
        if not cell.halfspaces:
            raise SceneError(f"cells[{i}] has no half-spaces")
        for j, h in enumerate(cell.halfspaces):
            if len(h.normal) != m:
                raise SceneError(
                    f"cells[{i}].halfspaces[{j}] normal has length {len(h.normal)}, expected {m}"
                )
            if scene.space.kappa > 0 and h.offset < -1e-12:
                raise SceneError(
                    f"cells[{i}].halfspaces[{j}] has negative offset {h.offset}; "
                    "positive-curvature cells must stay within a hemisphere"
                )


# -- scene JSON format --------------------------------------------------------


def scene_from_dict(data: dict) -> Scene:
    """Build and structurally validate a scene from its JSON dictionary."""
    if not isinstance(data, dict):
        raise SceneFormatError("scene document must be an object")
    try:
        kappa = float(data["kappa"])
    except KeyError:
        raise SceneFormatError("missing required key", "kappa") from None
    except (TypeError, ValueError):
        raise SceneFormatError("kappa must be a number", "kappa") from None
    dim = data.get("dim", 2)
    if not isinstance(dim, int) or dim < 1:
        raise SceneFormatError("dim must be a positive integer", "dim")
    cells_raw = data.get("cells")
    if not isinstance(cells_raw, list) or not cells_raw:
        raise SceneFormatError("cells must be a nonempty list", "cells")
    cells = []
    for i, cell_raw in enumerate(cells_raw):
        hs_raw = cell_raw.get("halfspaces") if isinstance(cell_raw, dict) else None
        if not isinstance(hs_raw, list) or not hs_raw:
            raise SceneFormatError(
                "halfspaces must be a nonempty list", f"cells[{i}].halfspaces"
            )
        halfspaces = []
        for j, h in enumerate(hs_raw):
            where = f"cells[{i}].halfspaces[{j}]"
            if not isinstance(h, dict) or "normal" not in h or "offset" not in h:
                raise SceneFormatError("expected {normal, offset}", where)
            try:
                halfspaces.append(HalfSpace.of(h["normal"], float(h["offset"])))
            except (SceneError, TypeError, ValueError) as exc:
                raise SceneFormatError(str(exc), where) from None
        cells.append(ConvexCell(halfspaces=tuple(halfspaces)))
    eps_hint = data.get("eps_hint")
    scene = Scene(
        space=ModelSpace(kappa=kappa, dim=dim),
        cells=tuple(cells),
        membership_tol=float(data.get("membership_tol", 1e-9)),
        eps_hint=None if eps_hint is None else float(eps_hint),
    )
    check_scene_structure(scene)
    return scene


def scene_to_dict(scene: Scene) -> dict:
    return {
        "kappa": scene.space.kappa,
        "dim": scene.space.dim,
        "membership_tol": scene.membership_tol,
        "eps_hint": scene.eps_hint,
        "cells": [
            {
                "halfspaces": [
                    {"normal": list(h.normal), "offset": h.offset}
                    for h in cell.halfspaces
                ]
            }
            for cell in scene.cells
        ],
    }


# -- constrained solvers ------------------------------------------------------


def _quadric_constraint(space: ModelSpace, n_extra: int = 0) -> dict:
    """Equality constraint pinning x to the sphere or hyperboloid."""
    m = space.ambient_dim
    r2 = space.radius**2
    sign = np.ones(m)
    target = r2
    if space.kappa < 0:
        sign[-1] = -1.0
        target = -r2

    def fun(z):
        x = z[:m]
        return np.array([np.dot(sign * x, x) - target])

    def jac(z):
        g = np.zeros((1, m + n_extra))
        g[0, :m] = 2.0 * sign * z[:m]
        return g

    return {"type": "eq", "fun": fun, "jac": jac}


def _solver_starts(space: ModelSpace, rng: np.random.Generator, n: int, spread: float) -> np.ndarray:
    pts = space.random_points(rng, n, spread=spread)
    pts[0] = space.base_point()
    return pts


def max_min_slack(
    space: ModelSpace,
    normals: np.ndarray,
    offsets: np.ndarray,
    rng: np.random.Generator,
    n_starts: int = 8,
    spread: float = 4.0,
) -> tuple[np.ndarray | None, float]:
    """Most interior point of a constraint system on the model surface.

    Maximizes the minimum slack; a nonnegative result certifies the cell is
    nonempty, a clearly negative one that it is empty (up to solver slack).
    """
    m = space.ambient_dim
    if space.kappa == 0:
        # linear program in (x, t): maximize t s.t. N x - t >= o, |x| <= box
        box = max(16.0, 4.0 * spread)
        a_ub = np.hstack([-normals, np.ones((len(offsets), 1))])
        c = np.zeros(m + 1)
        c[-1] = -1.0
        bounds = [(-box, box)] * m + [(None, 2.0 * box + float(np.abs(offsets).max()) + 1.0)]
        res = sciopt.linprog(c, A_ub=a_ub, b_ub=-offsets, bounds=bounds, method="highs")
        if not res.success:
            return None, -math.inf
        x = res.x[:m]
        return x, float((normals @ x - offsets).min())

    def fun(z):
        return -z[-1]

    jac = np.zeros(m + 1)
    jac[-1] = -1.0
    ineq_jac = np.hstack([normals, -np.ones((len(offsets), 1))])
    constraints = [
        _quadric_constraint(space, n_extra=1),
        {
            "type": "ineq",
            "fun": lambda z: normals @ z[:m] - offsets - z[-1],
            "jac": lambda z: ineq_jac,
        },
    ]
    if space.kappa < 0:
        sheet = np.zeros(m + 1)
        sheet[m - 1] = 1.0
        constraints.append(
            {
                "type": "ineq",
                "fun": lambda z: np.array([z[m - 1] - 0.5 * space.radius]),
                "jac": lambda z: sheet[None, :],
            }
        )
    best_x, best_slack = None, -math.inf
    for start in _solver_starts(space, rng, n_starts, spread):
        z0 = np.append(start, float((normals @ start - offsets).min()))
        res = sciopt.minimize(
            fun,
            z0,
            jac=lambda z: jac,
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": 300, "ftol": 1e-14},
        )
        if not np.all(np.isfinite(res.x)):
            continue
        try:
            x = space.project(res.x[:m])
        except GeometryError:
            continue
        slack = float((normals @ x - offsets).min())
        if slack > best_slack:
            best_x, best_slack = x, slack
    return best_x, best_slack


def snap_to_active(
    space: ModelSpace,
    normals: np.ndarray,
    offsets: np.ndarray,
    x: np.ndarray,
    active_tol: float = 1e-6,
) -> np.ndarray:
    """Polish a near-feasible point onto its active constraints exactly.

    Alternates a least-squares shift onto the near-active affine set with
    re-projection onto the model surface; needed so that points found by the
    solver register as members within membership tolerances.
    """
    for _ in range(6):
        slacks = normals @ x - offsets
        active = slacks < active_tol
        if slacks.min() >= -1e-12 and not np.any(np.abs(slacks[active]) > 1e-12):
            break
        if np.any(active):
            n_act = normals[active]
            shift, *_ = np.linalg.lstsq(n_act, offsets[active] - n_act @ x, rcond=None)
            x = x + shift
        if space.kappa != 0:
            try:
                x = space.project(x)
            except GeometryError:
                return x
    return x


def nearest_point_in_cell(
    space: ModelSpace,
    normals: np.ndarray,
    offsets: np.ndarray,
    target: np.ndarray,
    rng: np.random.Generator,
    n_starts: int = 3,
    spread: float = 4.0,
) -> tuple[np.ndarray | None, float]:
    """Distance projection of a model point onto a convex constraint set."""
    m = space.ambient_dim
    ineq = {
        "type": "ineq",
        "fun": lambda x: normals @ x - offsets,
        "jac": lambda x: normals,
    }
    if space.kappa == 0:

        def fun(x):
            d = x - target
            return 0.5 * float(d @ d)

        def jac(x):
            return x - target

        constraints = [ineq]
    else:
        if space.kappa > 0:
            grad = -target
        else:
            grad = -target.copy()
            grad[-1] = target[-1]  # maximize the Minkowski pairing

        def fun(x):
            return float(grad @ x)

        def jac(x):
            return grad

        constraints = [ineq, _quadric_constraint(space)]
    starts = [target] + list(_solver_starts(space, rng, n_starts, spread))
    best_x, best_d = None, math.inf
    for x0 in starts:
        res = sciopt.minimize(
            fun,
            np.asarray(x0, dtype=float),
            jac=jac,
            method="SLSQP",
            constraints=constraints,
            options={"maxiter": 200, "ftol": 1e-14},
        )
        if not np.all(np.isfinite(res.x)):
            continue
        x = res.x
        if space.kappa != 0:
            try:
                x = space.project(x)
            except GeometryError:
                continue
        x = snap_to_active(space, normals, offsets, x)
        if (normals @ x - offsets).min() < -_SOLVER_SLACK:
            continue
        d = space.distance(x, target)
        if d < best_d:
            best_x, best_d = x, d
    return best_x, best_d


def _combined_constraints(cells: list[ConvexCell]) -> tuple[np.ndarray, np.ndarray]:
    normals = np.vstack([c.normal_matrix for c in cells])
    offsets = np.concatenate([c.offsets for c in cells])
    return normals, offsets


# -- sampling -----------------------------------------------------------------


def _cell_vertices(space: ModelSpace, cell: ConvexCell, limit: int = 256) -> np.ndarray:
    """Corner points of a cell: intersections of maximal active constraint
    sets with the model surface.  Exact corners make diameter estimates and
    interface clouds sharp."""
    m = space.ambient_dim
    normals, offsets = cell.normal_matrix, cell.offsets
    k = m if space.kappa == 0 else m - 1
    n = len(offsets)
    if k < 1 or math.comb(n, min(k, n)) > limit:
        return np.empty((0, m))
    out = []
    for idx in itertools.combinations(range(n), min(k, n)):
        sub_n = normals[list(idx)]
        sub_o = offsets[list(idx)]
        sol, residuals, rank, _ = np.linalg.lstsq(sub_n, sub_o, rcond=None)
        if rank < len(idx):
            continue
        if space.kappa == 0:
            candidates = [sol] if np.allclose(sub_n @ sol, sub_o, atol=1e-9) else []
        else:
            # line (null space) through sol, intersected with the quadric
            _, s, vh = np.linalg.svd(sub_n)
            null = vh[rank:].T
            if null.shape[1] != 1:
                continue
            v = null[:, 0]
            sign = np.ones(m)
            target = space.radius**2
            if space.kappa < 0:
                sign[-1] = -1.0
                target = -target
            aa = float(np.dot(sign * v, v))
            bb = 2.0 * float(np.dot(sign * sol, v))
            cc = float(np.dot(sign * sol, sol)) - target
            candidates = []
            if abs(aa) < 1e-14:
                if abs(bb) > 1e-14:
                    candidates.append(sol + (-cc / bb) * v)
            else:
                disc = bb * bb - 4.0 * aa * cc
                if disc >= 0:
                    for root in ((-bb + math.sqrt(disc)) / (2 * aa), (-bb - math.sqrt(disc)) / (2 * aa)):
                        candidates.append(sol + root * v)
        for x in candidates:
            if space.kappa < 0 and x[-1] <= 0:
                continue
            x = snap_to_active(space, normals, offsets, x)
            if (normals @ x - offsets).min() >= -1e-9:
                out.append(x)
    return np.array(out) if out else np.empty((0, m))


def constraint_cloud(
    space: ModelSpace,
    normals: np.ndarray,
    offsets: np.ndarray,
    rng: np.random.Generator,
    n_target: int,
    anchor: np.ndarray | None = None,
    vertices: np.ndarray | None = None,
    n_proj: int = 16,
    spread: float = 4.0,
) -> np.ndarray:
    """Member points of one constraint set: exact corners, distance
    projections of random surface points, then random geodesic chords
    between found members (chords stay inside by convexity)."""
    pts: list[np.ndarray] = []
    if vertices is not None and len(vertices):
        pts.extend(vertices)
    if anchor is not None:
        pts.append(anchor)
    for target in space.random_points(rng, n_proj, spread=spread):
        x, _ = nearest_point_in_cell(space, normals, offsets, target, rng, n_starts=1, spread=spread)
        if x is not None:
            pts.append(x)
    if not pts:
        return np.empty((0, space.ambient_dim))
    d_bound = space.diameter_bound
    guard = 0
    while len(pts) < n_target and guard < 20 * n_target:
        guard += 1
        i, j = rng.integers(0, len(pts), size=2)
        if i == j:
            continue
        if space.distance(pts[i], pts[j]) >= d_bound * (1.0 - 1e-12):
            continue
        pts.append(space.geodesic_point(pts[i], pts[j], float(rng.uniform())))
    return np.array(pts[:n_target]) if len(pts) > n_target else np.array(pts)


# -- analysis and validation --------------------------------------------------


@dataclass
class SceneAnalysis:
    """Anchors and adjacency structure computed once per scene."""

    anchors: list[np.ndarray | None]
    anchor_slacks: list[float]
    adjacency: np.ndarray  # bool (n, n), diagonal True
    pair_anchors: dict[tuple[int, int], np.ndarray]
    components: list[list[int]]


def analyze_scene(scene: Scene, seed: int = 0) -> SceneAnalysis:
    """Find per-cell interior anchors and decide which cells intersect.

    Adjacency uses a constrained feasibility search on the combined
    constraint system, so cells meeting only along a shared facet (a
    measure-zero set that rejection sampling cannot hit) are still detected.
    """
    rng = np.random.default_rng(seed)
    n = len(scene.cells)
    tol = max(10.0 * scene.membership_tol, _SOLVER_SLACK)
    anchors, slacks = [], []
    for cell in scene.cells:
        x, s = max_min_slack(scene.space, cell.normal_matrix, cell.offsets, rng)
        anchors.append(x if s >= -tol else None)
        slacks.append(s)
    adjacency = np.eye(n, dtype=bool)
    pair_anchors: dict[tuple[int, int], np.ndarray] = {}
    for i in range(n):
        for j in range(i + 1, n):
            if anchors[i] is None or anchors[j] is None:
                continue
            normals, offsets = _combined_constraints([scene.cells[i], scene.cells[j]])
            x, s = max_min_slack(scene.space, normals, offsets, rng)
            if x is not None and s >= -tol:
                adjacency[i, j] = adjacency[j, i] = True
                pair_anchors[(i, j)] = snap_to_active(scene.space, normals, offsets, x)
    n_comp, labels = connected_components(csr_matrix(adjacency), directed=False)
    components = [[int(i) for i in np.flatnonzero(labels == c)] for c in range(n_comp)]
    return SceneAnalysis(
        anchors=anchors,
        anchor_slacks=slacks,
        adjacency=adjacency,
        pair_anchors=pair_anchors,
        components=components,
    )


@dataclass
class CellReport:
    nonempty: bool
    anchor_slack: float
    convex: bool
    witness: tuple[np.ndarray, np.ndarray, np.ndarray] | None
    sampled_diameter: float
    diameter_ok: bool


@dataclass
class SceneValidationReport:
    ok: bool
    connected: bool
    components: list[list[int]]
    cells: list[CellReport]
    samples: int
    seed: int
    analysis: SceneAnalysis = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "connected": self.connected,
            "components": self.components,
            "samples": self.samples,
            "seed": self.seed,
            "cells": [
                {
                    "nonempty": c.nonempty,
                    "anchor_slack": c.anchor_slack,
                    "convex": c.convex,
                    "sampled_diameter": c.sampled_diameter,
                    "diameter_ok": c.diameter_ok,
                    "witness": None
                    if c.witness is None
                    else [list(map(float, w)) for w in c.witness],
                }
                for c in self.cells
            ],
        }


def validate_scene(scene: Scene, samples: int = 2000, seed: int = 0) -> SceneValidationReport:
    """Check every cell invariant by sampled midpoint tests and the scene
    connectedness through the cell-intersection graph.  Deterministic in
    the seed; a nonconvex cell is reported with a concrete witness pair."""
    check_scene_structure(scene)
    rng = np.random.default_rng(seed)
    analysis = analyze_scene(scene, seed=seed)
    space = scene.space
    d_bound = space.diameter_bound
    witness_tol = max(10.0 * scene.membership_tol, 1e-8)
    reports = []
    for idx, cell in enumerate(scene.cells):
        anchor = analysis.anchors[idx]
        slack = analysis.anchor_slacks[idx]
        if anchor is None:
            reports.append(CellReport(False, slack, False, None, 0.0, True))
            continue
        cloud = constraint_cloud(
            space,
            cell.normal_matrix,
            cell.offsets,
            rng,
            n_target=min(samples, 256),
            anchor=anchor,
            vertices=_cell_vertices(space, cell),
            n_proj=24,
        )
        diam = float(space.pairwise_distances(cloud).max()) if len(cloud) else 0.0
        diameter_ok = space.kappa <= 0 or diam <= d_bound + 1e-9
        convex = True
        witness = None
        for _ in range(samples):
            i, j = rng.integers(0, len(cloud), size=2)
            if i == j:
                continue
            if space.distance(cloud[i], cloud[j]) >= d_bound * (1.0 - 1e-12):
                continue
            mid = space.midpoint(cloud[i], cloud[j])
            if float(cell.margins(mid[None, :])[0]) < -witness_tol:
                convex = False
                witness = (cloud[i].copy(), cloud[j].copy(), mid)
                break
        reports.append(CellReport(True, slack, convex, witness, diam, diameter_ok))
    connected = len(analysis.components) <= 1
    ok = connected and all(r.nonempty and r.convex and r.diameter_ok for r in reports)
    return SceneValidationReport(
        ok=ok,
        connected=connected,
        components=analysis.components,
        cells=reports,
        samples=samples,
        seed=seed,
        analysis=analysis,
    )


# -- local convexity ----------------------------------------------------------


@dataclass
class LocalConvexityReport:
    passed: bool
    eps: float
    pairs_tested: int
    witness: tuple[np.ndarray, np.ndarray, np.ndarray] | None
    witness_margin: float | None

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "eps": self.eps,
            "pairs_tested": self.pairs_tested,
            "witness": None
            if self.witness is None
            else [list(map(float, w)) for w in self.witness],
            "witness_margin": self.witness_margin,
        }


def _samples_near(
    scene: Scene,
    p: np.ndarray,
    eps: float,
    rng: np.random.Generator,
    n_per_cell: int,
    analysis: SceneAnalysis,
) -> np.ndarray:
    """Points of the scene inside the ball B_p(eps), gathered per cell.

    For each cell we pick an in-cell point near p (p itself when p belongs
    to the cell, otherwise the distance projection of p) and walk geodesic
    chords toward random cell members, truncated at the ball boundary;
    convexity of the cell keeps every sample inside it."""
    space = scene.space
    out = [p]
    for idx, cell in enumerate(scene.cells):
        if analysis.anchors[idx] is None:
            continue
        if float(cell.margins(p[None, :])[0]) >= -scene.membership_tol:
            near = p
        else:
            near, dist = nearest_point_in_cell(
                space, cell.normal_matrix, cell.offsets, p, rng, n_starts=2
            )
            if near is None or dist > eps * 0.999:
                continue
        cloud = constraint_cloud(
            space,
            cell.normal_matrix,
            cell.offsets,
            rng,
            n_target=max(12, n_per_cell // 2),
            anchor=analysis.anchors[idx],
            vertices=None,
            n_proj=10,
        )
        if not len(cloud):
            continue
        for _ in range(n_per_cell):
            q = cloud[rng.integers(0, len(cloud))]
            d_nq = space.distance(near, q)
            if d_nq >= space.diameter_bound * (1.0 - 1e-12):
                continue
            # largest chord parameter staying inside the ball around p
            lo, hi = 0.0, 1.0
            if space.distance(p, q) > eps:
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    if space.distance(p, space.geodesic_point(near, q, mid)) <= eps:
                        lo = mid
                    else:
                        hi = mid
                hi = lo
            u = float(rng.uniform(0.0, hi))
            out.append(space.geodesic_point(near, q, u))
    return np.array(out)


def local_convexity_check(
    scene: Scene,
    p,
    eps: float,
    samples: int = 400,
    seed: int = 0,
    analysis: SceneAnalysis | None = None,
) -> LocalConvexityReport:
    """Probe convexity of B_p(eps) with midpoint tests on sampled pairs.

    Midpoint convexity plus closedness implies convexity, so an escaping
    midpoint refutes local convexity outright; a pass is sampling evidence.
    """
    point = scene.space.check_point(p)
    if not scene.contains_point(point):
        raise GeometryError("base point is not a member of the scene")
    if eps >= scene.space.diameter_bound / 2.0:
        raise GeometryError(f"eps must be below half the diameter bound, got {eps}")
    rng = np.random.default_rng(seed)
    if analysis is None:
        analysis = analyze_scene(scene, seed=seed)
    cloud = _samples_near(scene, point, eps, rng, max(16, samples // 8), analysis)
    witness_tol = max(10.0 * scene.membership_tol, 1e-8)
    space = scene.space
    tested = 0
    for _ in range(samples):
        i, j = rng.integers(0, len(cloud), size=2)
        if i == j:
            continue
        if space.distance(cloud[i], cloud[j]) >= space.diameter_bound * (1.0 - 1e-12):
            continue
        mid = space.midpoint(cloud[i], cloud[j])
        tested += 1
        margin = scene.margin(mid)
        if margin < -witness_tol:
            return LocalConvexityReport(
                passed=False,
                eps=eps,
                pairs_tested=tested,
                witness=(cloud[i].copy(), cloud[j].copy(), mid),
                witness_margin=margin,
            )
    return LocalConvexityReport(True, eps, tested, None, None)


def select_eps(
    scene: Scene,
    seed: int = 0,
    analysis: SceneAnalysis | None = None,
    floor: float = 1e-3,
) -> tuple[float, str]:
    """Local-convexity radius: the scene hint when present, otherwise half
    the sampled clearance between non-adjacent cells, floored."""
    cap = 0.49 * scene.space.diameter_bound
    if scene.eps_hint is not None:
        return min(scene.eps_hint, cap), "hint"
    rng = np.random.default_rng(seed)
    if analysis is None:
        analysis = analyze_scene(scene, seed=seed)
    n = len(scene.cells)
    clearance = math.inf
    for i in range(n):
        if analysis.anchors[i] is None:
            continue
        cloud = constraint_cloud(
            scene.space,
            scene.cells[i].normal_matrix,
            scene.cells[i].offsets,
            rng,
            n_target=24,
            anchor=analysis.anchors[i],
            n_proj=12,
        )
        for j in range(n):
            if i == j or analysis.adjacency[i, j] or analysis.anchors[j] is None:
                continue
            for q in cloud:
                _, dist = nearest_point_in_cell(
                    scene.space,
                    scene.cells[j].normal_matrix,
                    scene.cells[j].offsets,
                    q,
                    rng,
                    n_starts=1,
                )
                clearance = min(clearance, dist)
    if math.isinf(clearance):
        # no non-adjacent pair: fall back to the coarse scene scale
        diams = [s for s in analysis.anchor_slacks if s > 0]
        clearance = 2.0 * max(diams) if diams else 2.0 * floor
    return min(max(clearance / 2.0, floor), cap), "heuristic"


# -- length metric graph ------------------------------------------------------


@dataclass(frozen=True)
class LengthPath:
    """Polyline inside the scene; length is the sum of geodesic legs."""

    vertices: np.ndarray
    length: float


def path_length(space: ModelSpace, vertices: np.ndarray) -> float:
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) < 2:
        return 0.0
    return float(
        sum(space.distance(vertices[i], vertices[i + 1]) for i in range(len(vertices) - 1))
    )


def check_length_path(scene: Scene, path: LengthPath, tol: float = 1e-9) -> None:
    """Assert the audit invariants of a path: member vertices, co-cell legs,
    consistent length."""
    flags = scene.cell_flags(path.vertices)
    if not np.all(flags.any(axis=1)):
        raise SceneError("path vertex escapes the scene")
    for i in range(len(path.vertices) - 1):
        if not np.any(flags[i] & flags[i + 1]):
            raise SceneError(f"path leg {i} does not stay inside a single cell")
    if abs(path_length(scene.space, path.vertices) - path.length) > max(tol, 1e-9 * (1 + path.length)):
        raise SceneError("recorded path length is inconsistent")


class SceneGraph:
    """Shortest-path approximation of the induced length metric.

    Nodes are member points (cell corners, per-cell clouds, and clouds on
    every pairwise cell intersection at spacing tied to the resolution);
    edges join nodes sharing a cell, weighted by ambient distance, so every
    edge is a geodesic leg inside the scene.  Shortest paths overestimate
    the length metric and converge to it as the resolution shrinks.
    """

    def __init__(self, scene: Scene, resolution: float = 0.01, seed: int = 0,
                 analysis: SceneAnalysis | None = None, node_cap: int = 2500):
        if resolution <= 0:
            raise GeometryError(f"resolution must be positive, got {resolution}")
        self.scene = scene
        self.resolution = resolution
        self.seed = seed
        rng = np.random.default_rng(seed)
        if analysis is None:
            analysis = analyze_scene(scene, seed=seed)
        self.analysis = analysis
        space = scene.space
        thin_tol = max(1e-6, 10.0 * scene.membership_tol)
        clouds = []
        for idx, cell in enumerate(scene.cells):
            if analysis.anchors[idx] is None:
                continue
            verts = _cell_vertices(space, cell)
            seed_cloud = constraint_cloud(
                space, cell.normal_matrix, cell.offsets, rng,
                n_target=24, anchor=analysis.anchors[idx], vertices=verts, n_proj=12,
            )
            diam = float(space.pairwise_distances(seed_cloud).max()) if len(seed_cloud) else 0.0
            if analysis.anchor_slacks[idx] < thin_tol:
                # measure-zero cell: the path runs along it, so densify
                n_target = int(np.clip(math.ceil(5.0 * diam / resolution), 32, node_cap))
            else:
                n_target = 64
            clouds.append(
                constraint_cloud(
                    space, cell.normal_matrix, cell.offsets, rng,
                    n_target=n_target, anchor=analysis.anchors[idx],
                    vertices=seed_cloud, n_proj=0,
                )
            )
        for (i, j), anchor in sorted(analysis.pair_anchors.items()):
            normals, offsets = _combined_constraints([scene.cells[i], scene.cells[j]])
            seed_cloud = constraint_cloud(
                space, normals, offsets, rng, n_target=12, anchor=anchor, n_proj=10
            )
            diam = float(space.pairwise_distances(seed_cloud).max()) if len(seed_cloud) else 0.0
            n_target = int(np.clip(math.ceil(4.0 * diam / resolution), 8, 800))
            clouds.append(
                constraint_cloud(
                    space, normals, offsets, rng,
                    n_target=n_target, anchor=anchor, vertices=seed_cloud, n_proj=0,
                )
            )
        nodes = np.vstack([c for c in clouds if len(c)]) if clouds else np.empty((0, space.ambient_dim))
        self.nodes = nodes
        self.node_flags = scene.cell_flags(nodes)
        self.graph = self._build_edges(self.nodes, self.node_flags)
        self.dijkstra_runs = 0

    def _build_edges(self, nodes: np.ndarray, flags: np.ndarray) -> csr_matrix:
        space = self.scene.space
        k = len(nodes)
        d_bound = space.diameter_bound
        rows, cols, data = [], [], []
        for cell_idx in range(flags.shape[1]):
            members = np.flatnonzero(flags[:, cell_idx])
            if len(members) < 2:
                continue
            dmat = space.pairwise_distances(nodes[members])
            iu, ju = np.triu_indices(len(members), k=1)
            ok = dmat[iu, ju] < d_bound * (1.0 - 1e-12)
            rows.append(members[iu[ok]])
            cols.append(members[ju[ok]])
            data.append(dmat[iu[ok], ju[ok]])
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            data = np.concatenate(data)
            # drop duplicate edges contributed by overlapping cells
            keys = rows.astype(np.int64) * k + cols
            _, keep = np.unique(keys, return_index=True)
            rows, cols, data = rows[keep], cols[keep], data[keep]
        else:
            rows = cols = np.empty(0, dtype=int)
            data = np.empty(0)
        return csr_matrix((data, (rows, cols)), shape=(k, k))

    def _attach(self, points: np.ndarray) -> csr_matrix:
        """Graph augmented with extra endpoint rows joined to co-cell nodes."""
        scene, space = self.scene, self.scene.space
        k = len(self.nodes)
        extra_flags = scene.cell_flags(points)
        coo = self.graph.tocoo()
        rows, cols, data = [coo.row], [coo.col], [coo.data]
        d_bound = space.diameter_bound
        for e, point in enumerate(points):
            shared = (self.node_flags & extra_flags[e]).any(axis=1)
            idx = np.flatnonzero(shared)
            if len(idx):
                dists = space.pairwise_distances(point[None, :], self.nodes[idx])[0]
                ok = dists < d_bound * (1.0 - 1e-12)
                rows.append(np.full(ok.sum(), k + e))
                cols.append(idx[ok])
                data.append(dists[ok])
        # direct edges between the attached points themselves
        for e1 in range(len(points)):
            for e2 in range(e1 + 1, len(points)):
                if np.any(extra_flags[e1] & extra_flags[e2]):
                    d = space.distance(points[e1], points[e2])
                    if d < d_bound * (1.0 - 1e-12):
                        rows.append(np.array([k + e1]))
                        cols.append(np.array([k + e2]))
                        data.append(np.array([d]))
        return csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(k + len(points), k + len(points)),
        )

    def query(self, x, y) -> LengthPath:
        """Shortest member-to-member path through the graph."""
        scene, space = self.scene, self.scene.space
        x = space.check_point(x)
        y = space.check_point(y)
        for name, p in (("x", x), ("y", y)):
            if not scene.contains_point(p):
                raise GeometryError(f"endpoint {name} is not a member of the scene")
        graph = self._attach(np.array([x, y]))
        k = len(self.nodes)
        self.dijkstra_runs += 1
        dist, pred = dijkstra(
            graph, directed=False, indices=[k], return_predecessors=True
        )
        if not np.isfinite(dist[0, k + 1]):
            raise DisconnectedSceneError("no path between the endpoints inside the scene")
        order = [k + 1]
        while order[-1] != k:
            order.append(int(pred[0, order[-1]]))
        order.reverse()
        all_points = np.vstack([self.nodes, x[None, :], y[None, :]]) if k else np.array([x, y])
        vertices = all_points[order]
        return LengthPath(vertices=vertices, length=float(dist[0, k + 1]))

    def diameter(self, max_sources: int = 500) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
        """Largest shortest-path length over sampled node pairs."""
        k = len(self.nodes)
        if k == 0:
            raise SceneError("graph has no nodes")
        sources = np.arange(k)
        if k > max_sources:
            sources = np.linspace(0, k - 1, max_sources).astype(int)
        self.dijkstra_runs += 1
        dist = dijkstra(self.graph, directed=False, indices=sources)
        if not np.all(np.isfinite(dist)):
            raise DisconnectedSceneError("scene graph is disconnected")
        flat = int(np.argmax(dist))
        si, ti = divmod(flat, k)
        return float(dist[si, ti]), (self.nodes[sources[si]].copy(), self.nodes[ti].copy())


def length_metric(
    scene: Scene,
    x,
    y,
    resolution: float = 0.01,
    seed: int = 0,
    graph: SceneGraph | None = None,
) -> LengthPath:
    """Approximate induced length distance inside the scene.

    Builds (or reuses) the interface graph and returns the shortest
    polyline; each leg lies in one convex cell.  The reported length
    overestimates the true infimum by O(resolution).
    """
    if graph is None:
        graph = SceneGraph(scene, resolution=resolution, seed=seed)
    return graph.query(x, y)


def intrinsic_diameter(
    scene: Scene,
    resolution: float = 0.01,
    seed: int = 0,
    graph: SceneGraph | None = None,
) -> float:
    """Estimate of the scene diameter in the induced length metric."""
    if graph is None:
        graph = SceneGraph(scene, resolution=resolution, seed=seed)
    value, _ = graph.diameter()
    return value
