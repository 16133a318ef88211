"""Midpoint geometry of triangles on the unit sphere.

For a spherical triangle with vertex x and opposite side c, the distance c'
between the midpoints of the two sides leaving x satisfies

    cos(a/2) cos(b/2) cos(c') = (cos c - 1 + 2 (cos^2(a/2) + cos^2(b/2))) / 4.

When both sides a, b stay below a bound C < 2*pi/3 the midpoint distance
contracts: c' <= K(C) * c with K(C) = 1 / (2 cos(C/2)) < 1.  This constant
drives the geometric convergence of the midpoint iteration in
:mod:`catconvex.local_global`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, NumericalDomainError, TriangleError

__all__ = [
    "SphericalTriangleData",
    "half_midpoint_distance",
    "equal_sides_half_midpoint",
    "contraction_constant",
    "max_midpoint_ratio",
    "sample_triangles",
]

# Inverse-trig arguments may leave [-1, 1] by at most this much before the
# excursion is treated as a genuine domain error rather than rounding.
_DOMAIN_SLACK = 1e-9

_TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def _clamp_unit(value: float, what: str) -> float:
    if value < -1.0 - _DOMAIN_SLACK or value > 1.0 + _DOMAIN_SLACK:
        raise NumericalDomainError(f"{what} outside [-1, 1]: {value}")
    return min(max(value, -1.0), 1.0)


def _validate_sides(a: float, b: float, c: float) -> None:
    slack = 1e-12
    for name, s in (("a", a), ("b", b), ("c", c)):
        if not math.isfinite(s) or s < -slack or s >= math.pi:
            raise TriangleError(f"side {name} must lie in [0, pi), got {s}")
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise TriangleError(f"triangle inequality fails for {(a, b, c)}")
    if a + b + c > 2.0 * math.pi + slack:
        raise TriangleError(f"perimeter {a + b + c} exceeds 2*pi")


def half_midpoint_distance(a: float, b: float, c: float) -> float:
    """Distance between the midpoints of the sides of lengths a and b.

    Sides are measured from the common vertex; c is the opposite side.
    Degenerate sides are allowed and give the analytic limit.
    """
    _validate_sides(a, b, c)
    alpha = math.cos(a / 2.0)
    beta = math.cos(b / 2.0)
    rhs = 0.25 * (math.cos(c) - 1.0 + 2.0 * (alpha * alpha + beta * beta))
    return math.acos(_clamp_unit(rhs / (alpha * beta), "midpoint-distance cosine"))


def equal_sides_half_midpoint(a: float, c: float) -> float:
    """Midpoint distance for the isoceles triangle with both sides equal to a.

    Uses sin(c'/2) = sin(c/2) / (2 cos(a/2)), which agrees with
    half_midpoint_distance(a, a, c) wherever both are defined.
    """
    _validate_sides(a, a, c)
    arg = math.sin(c / 2.0) / (2.0 * math.cos(a / 2.0))
    if arg > 1.0 + _DOMAIN_SLACK or arg < -_DOMAIN_SLACK:
        raise NumericalDomainError(f"arcsine argument outside [0, 1]: {arg}")
    return 2.0 * math.asin(min(max(arg, 0.0), 1.0))


def contraction_constant(C: float) -> float:
    """Midpoint contraction factor K(C) = 1/(2 cos(C/2)) for sides <= C.

    K is strictly below 1 exactly on 0 < C < 2*pi/3; larger bounds are
    rejected because no contraction holds there.
    """
    if not 0.0 < C < _TWO_THIRDS_PI:
        raise GeometryError(
            f"side bound must lie in (0, 2*pi/3), got {C}"
        )
    return 1.0 / (2.0 * math.cos(C / 2.0))


@dataclass(frozen=True)
class SphericalTriangleData:
    """Side lengths, vertex angle, and midpoint quantities of one triangle."""

    a: float
    b: float
    c: float
    theta: float
    c_prime: float
    alpha: float
    beta: float

    @classmethod
    def from_sides(cls, a: float, b: float, c: float) -> "SphericalTriangleData":
        _validate_sides(a, b, c)
        sa, sb = math.sin(a), math.sin(b)
        if sa < 1e-300 or sb < 1e-300:
            theta = 0.0
        else:
            theta = math.acos(
                _clamp_unit(
                    (math.cos(c) - math.cos(a) * math.cos(b)) / (sa * sb),
                    "vertex angle cosine",
                )
            )
        return cls(
            a=a,
            b=b,
            c=c,
            theta=theta,
            c_prime=half_midpoint_distance(a, b, c),
            alpha=math.cos(a / 2.0),
            beta=math.cos(b / 2.0),
        )


def sample_triangles(rng: np.random.Generator, n: int, side_bound: float) -> np.ndarray:
    """Sample n valid spherical triangles with both vertex sides <= side_bound.

    Sides a, b and the included angle are drawn uniformly; the opposite side
    follows from the law of cosines, so every sample is realizable.
    Returns an (n, 3) array of (a, b, c).
    """
    a = rng.uniform(1e-6, side_bound, size=n)
    b = rng.uniform(1e-6, side_bound, size=n)
    theta = rng.uniform(0.0, math.pi, size=n)
    cos_c = np.cos(a) * np.cos(b) + np.sin(a) * np.sin(b) * np.cos(theta)
    c = np.arccos(np.clip(cos_c, -1.0, 1.0))
    return np.column_stack([a, b, c])


def max_midpoint_ratio(C: float, steps: int = 40) -> float:
    """Grid maximization of c'/c over valid triangles with sides a, b <= C.

    The supremum is approached at a = b = C with c -> 0, so the grid
    includes small opposite sides; the returned value never exceeds
    contraction_constant(C).
    """
    if not 0.0 < C < math.pi:
        raise GeometryError(f"side bound must lie in (0, pi), got {C}")
    best = 0.0
    sides = np.linspace(C / steps, C, steps)
    for a in sides:
        for b in sides:
            c_hi = min(a + b, math.pi - 1e-9, 2.0 * math.pi - a - b)
            c_lo = max(abs(a - b), 1e-4)
            if c_lo >= c_hi:
                continue
            for c in np.geomspace(c_lo, c_hi, steps):
                ratio = half_midpoint_distance(float(a), float(b), float(c)) / c
                if ratio > best:
                    best = ratio
    return best
