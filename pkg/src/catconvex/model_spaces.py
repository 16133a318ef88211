"""Exact-formula geometry of the constant-curvature model spaces.

Points live in explicit embeddings: the round sphere of radius 1/sqrt(kappa)
for kappa > 0, flat coordinates for kappa = 0, and the upper sheet of the
Minkowski hyperboloid for kappa < 0.  All operations are closed-form, pure,
and re-project their results onto the embedding surface to keep
normalization drift below 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    GeometryError,
    InvalidPointError,
    TriangleError,
    UniquenessRegimeError,
)

__all__ = [
    "ModelSpace",
    "GeodesicSegment",
    "diameter_bound",
]

# Interpolation below this angle switches to a lerp-and-project fallback.
_SMALL_ANGLE = 1e-8


def diameter_bound(kappa: float) -> float:
    """Diameter of the model space: pi/sqrt(kappa) if kappa > 0, else inf."""
    if not math.isfinite(kappa):
        raise GeometryError(f"curvature must be finite, got {kappa}")
    if kappa > 0:
        return math.pi / math.sqrt(kappa)
    return math.inf


def _minkowski(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear form with signature (+...+, -), last coordinate timelike."""
    return np.sum(x[..., :-1] * y[..., :-1], axis=-1) - x[..., -1] * y[..., -1]


def _clamp(value: float, lo: float, hi: float, slack: float, what: str) -> float:
    if value < lo - slack or value > hi + slack:
        raise GeometryError(f"{what} out of range: {value}")
    return min(max(value, lo), hi)


@dataclass(frozen=True)
class ModelSpace:
    """Simply connected surface (or n-space) of constant curvature.

    ``dim`` is the intrinsic dimension; embeddings use ``dim + 1`` ambient
    coordinates for kappa != 0 and ``dim`` coordinates for kappa = 0.
    """

    kappa: float
    dim: int = 2

    def __post_init__(self):
        if not math.isfinite(self.kappa):
            raise GeometryError(f"curvature must be finite, got {self.kappa}")
        if self.dim < 1:
            raise GeometryError(f"dimension must be >= 1, got {self.dim}")

    @property
    def radius(self) -> float:
        """Embedding radius 1/sqrt(|kappa|); undefined for kappa = 0."""
        if self.kappa == 0:
            raise GeometryError("flat space has no embedding radius")
        return 1.0 / math.sqrt(abs(self.kappa))

    @property
    def ambient_dim(self) -> int:
        return self.dim if self.kappa == 0 else self.dim + 1

    @property
    def diameter_bound(self) -> float:
        return diameter_bound(self.kappa)

    # -- point validation -------------------------------------------------

    def check_point(self, p, tol: float = 1e-12) -> np.ndarray:
        """Validate embedding coordinates, returning a float64 copy."""
        q = np.asarray(p, dtype=float)
        if q.shape != (self.ambient_dim,):
            raise InvalidPointError(
                f"expected {self.ambient_dim} coordinates, got shape {q.shape}"
            )
        if not np.all(np.isfinite(q)):
            raise InvalidPointError(f"non-finite coordinates: {q}")
        if self.kappa > 0:
            r = self.radius
            if abs(np.linalg.norm(q) - r) > tol * max(1.0, r):
                raise InvalidPointError(
                    f"point is off the sphere of radius {r}: {q}"
                )
        elif self.kappa < 0:
            r2 = self.radius**2
            if abs(_minkowski(q, q) + r2) > tol * max(1.0, r2):
                raise InvalidPointError(f"point is off the hyperboloid: {q}")
            if q[-1] <= 0:
                raise InvalidPointError(f"point is not on the upper sheet: {q}")
        return q

    def project(self, p) -> np.ndarray:
        """Re-normalize near-surface coordinates onto the embedding."""
        q = np.asarray(p, dtype=float)
        if self.kappa > 0:
            return q * (self.radius / np.linalg.norm(q))
        if self.kappa < 0:
            form = _minkowski(q, q)
            if form >= 0 or q[-1] <= 0:
                raise InvalidPointError(f"cannot project onto upper sheet: {q}")
            return q * math.sqrt(-(self.radius**2) / form)
        return q

    # -- metric ------------------------------------------------------------

    def distance(self, p, q) -> float:
        """Geodesic distance between two points of the space."""
        return float(self.pairwise_distances(np.asarray(p, dtype=float)[None, :],
                                             np.asarray(q, dtype=float)[None, :])[0, 0])

    def pairwise_distances(self, P: np.ndarray, Q: np.ndarray | None = None) -> np.ndarray:
        """Distance matrix between rows of P and rows of Q (or P itself)."""
        P = np.asarray(P, dtype=float)
        Q = P if Q is None else np.asarray(Q, dtype=float)
        if self.kappa == 0:
            diff = P[:, None, :] - Q[None, :, :]
            return np.sqrt(np.sum(diff * diff, axis=-1))
        r = self.radius
        if self.kappa > 0:
            U, V = P / r, Q / r
            diff = np.linalg.norm(U[:, None, :] - V[None, :, :], axis=-1)
            summ = np.linalg.norm(U[:, None, :] + V[None, :, :], axis=-1)
            # half-angle form is well conditioned at both ends of [0, pi]
            return r * 2.0 * np.arctan2(diff, summ)
        diff = P[:, None, :] - Q[None, :, :]
        s = np.maximum(_minkowski(diff, diff), 0.0)
        return r * 2.0 * np.arcsinh(np.sqrt(s) / 2.0)

    # -- geodesics ----------------------------------------------------------

    def geodesic_point(self, p, q, t: float) -> np.ndarray:
        """Point at parameter t in [0, 1] along the unique geodesic p -> q."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if t < -1e-12 or t > 1.0 + 1e-12:
            raise GeometryError(f"interpolation parameter outside [0, 1]: {t}")
        t = min(max(t, 0.0), 1.0)
        d = self.distance(p, q)
        if d >= self.diameter_bound:
            raise UniquenessRegimeError(
                f"no unique geodesic: distance {d} >= {self.diameter_bound}"
            )
        if self.kappa == 0:
            return (1.0 - t) * p + t * q
        omega = d / self.radius
        if omega < _SMALL_ANGLE:
            return self.project((1.0 - t) * p + t * q)
        if self.kappa > 0:
            s = math.sin(omega)
            out = (math.sin((1.0 - t) * omega) * p + math.sin(t * omega) * q) / s
        else:
            s = math.sinh(omega)
            out = (math.sinh((1.0 - t) * omega) * p + math.sinh(t * omega) * q) / s
        return self.project(out)

    def geodesic_points(self, p, q, ts) -> np.ndarray:
        """Vectorized geodesic_point over a sequence of parameters."""
        ts = np.asarray(ts, dtype=float)
        return np.array([self.geodesic_point(p, q, float(t)) for t in ts])

    def midpoint(self, p, q) -> np.ndarray:
        """Unique midpoint m with d(p, m) = d(m, q) = d(p, q) / 2."""
        return self.geodesic_point(p, q, 0.5)

    def segment(self, p, q) -> "GeodesicSegment":
        p = self.check_point(p)
        q = self.check_point(q)
        d = self.distance(p, q)
        if d >= self.diameter_bound:
            raise UniquenessRegimeError(
                f"segment length {d} >= uniqueness bound {self.diameter_bound}"
            )
        return GeodesicSegment(endpoints=(p, q), length=d)

    # -- tangent helpers (used by samplers) ---------------------------------

    def base_point(self) -> np.ndarray:
        """Canonical base point of the embedding."""
        if self.kappa == 0:
            return np.zeros(self.dim)
        e = np.zeros(self.ambient_dim)
        if self.kappa > 0:
            e[0] = self.radius
        else:
            e[-1] = self.radius
        return e

    def tangent_project(self, p: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Project an ambient vector onto the tangent space at p."""
        if self.kappa == 0:
            return g
        r2 = self.radius**2
        if self.kappa > 0:
            return g - (np.dot(g, p) / r2) * p
        return g + (_minkowski(g, p) / r2) * p

    def exp(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Exponential map: follow the geodesic from p with velocity v."""
        if self.kappa == 0:
            return p + v
        if self.kappa > 0:
            norm = float(np.linalg.norm(v))
        else:
            norm = math.sqrt(max(float(_minkowski(v, v)), 0.0))
        if norm < 1e-300:
            return p.copy()
        u = v / norm
        omega = norm / self.radius
        if self.kappa > 0:
            out = math.cos(omega) * p + self.radius * math.sin(omega) * u
        else:
            out = math.cosh(omega) * p + self.radius * math.sinh(omega) * u
        return self.project(out)

    def random_points(self, rng: np.random.Generator, n: int, spread: float = 2.0) -> np.ndarray:
        """Random points: uniform on the sphere, else within distance spread
        of the base point (uniform in radius, uniform in direction)."""
        if self.kappa > 0:
            g = rng.standard_normal((n, self.ambient_dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            return g * self.radius
        base = self.base_point()
        out = np.empty((n, self.ambient_dim))
        for i in range(n):
            g = self.tangent_project(base, rng.standard_normal(self.ambient_dim))
            if self.kappa < 0:
                nrm = math.sqrt(max(float(_minkowski(g, g)), 1e-300))
            else:
                nrm = float(np.linalg.norm(g)) or 1.0
            out[i] = self.exp(base, g * (rng.uniform(0.0, spread) / nrm))
        return out

    # -- comparison triangles ------------------------------------------------

    def _check_triangle_sides(self, a: float, b: float, c: float) -> None:
        slack = 1e-12
        for name, s in (("a", a), ("b", b), ("c", c)):
            if s < -slack or not math.isfinite(s):
                raise TriangleError(f"side {name} must be nonnegative, got {s}")
        if a > b + c + slack or b > a + c + slack or c > a + b + slack:
            raise TriangleError(f"triangle inequality fails for sides {(a, b, c)}")
        if self.kappa > 0 and a + b + c >= 2.0 * self.diameter_bound:
            raise TriangleError(
                f"perimeter {a + b + c} is not below {2.0 * self.diameter_bound}"
            )

    def _vertex_angle(self, a: float, b: float, c: float) -> float:
        """Angle between the sides of lengths b and c (opposite side a)."""
        if b < 1e-300 or c < 1e-300:
            return 0.0
        if self.kappa == 0:
            cos_theta = (b * b + c * c - a * a) / (2.0 * b * c)
        else:
            r = self.radius
            ah, bh, ch = a / r, b / r, c / r
            if self.kappa > 0:
                denom = math.sin(bh) * math.sin(ch)
                if denom < 1e-300:
                    return 0.0
                cos_theta = (math.cos(ah) - math.cos(bh) * math.cos(ch)) / denom
            else:
                denom = math.sinh(bh) * math.sinh(ch)
                if denom < 1e-300:
                    return 0.0
                cos_theta = (math.cosh(bh) * math.cosh(ch) - math.cosh(ah)) / denom
        cos_theta = _clamp(cos_theta, -1.0, 1.0, 1e-9, "triangle angle cosine")
        return math.acos(cos_theta)

    def comparison_triangle(self, a: float, b: float, c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vertices (A, B, C) realizing d(B,C)=a, d(A,C)=b, d(A,B)=c.

        Placement is canonical: A at the base point, B along the first
        tangent direction, C in the half-plane spanned by the first two.
        Requires dim >= 2.
        """
        if self.dim < 2:
            raise TriangleError("comparison triangles need dimension >= 2")
        self._check_triangle_sides(a, b, c)
        theta = self._vertex_angle(a, b, c)
        A = self.base_point()
        e1 = np.zeros(self.ambient_dim)
        e2 = np.zeros(self.ambient_dim)
        if self.kappa > 0:
            e1[1] = 1.0
            e2[2] = 1.0
        elif self.kappa < 0:
            e1[0] = 1.0
            e2[1] = 1.0
        else:
            e1[0] = 1.0
            e2[1] = 1.0
        dir_b = math.cos(theta) * e1 + math.sin(theta) * e2
        B = self.exp(A, c * e1)
        C = self.exp(A, b * dir_b)
        return A, B, C

    def comparison_point_distance(self, a: float, b: float, c: float, s: float, t: float) -> float:
        """Distance between points at arclengths s on the side of length c
        and t on the side of length b, both measured from the shared vertex."""
        A, B, C = self.comparison_triangle(a, b, c)
        slack = 1e-9
        if s < -slack or s > c + slack:
            raise GeometryError(f"arclength s={s} outside [0, {c}]")
        if t < -slack or t > b + slack:
            raise GeometryError(f"arclength t={t} outside [0, {b}]")
        P = A if c < 1e-300 else self.geodesic_point(A, B, min(max(s / c, 0.0), 1.0))
        Q = A if b < 1e-300 else self.geodesic_point(A, C, min(max(t / b, 0.0), 1.0))
        return self.distance(P, Q)


@dataclass(frozen=True)
class GeodesicSegment:
    """A unique geodesic segment, recorded by endpoints and length."""

    endpoints: tuple[np.ndarray, np.ndarray]
    length: float
