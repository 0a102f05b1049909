"""Points and the chordal metric on the extended complex plane.

A sphere point is either an ordinary Python ``complex`` with finite,
non-NaN coordinates, or the module-level sentinel :data:`INF`.  There is
exactly one representation of the point at infinity; signed float
infinities and NaNs never appear in validated data.
"""
from __future__ import annotations

import math
from typing import Union

__all__ = ["INF", "SpherePoint", "is_inf", "ensure_point", "chordal_distance"]


class _Infinity:
    """Singleton marker for the point at infinity."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "INF"


INF = _Infinity()

SpherePoint = Union[complex, _Infinity]

# Beyond this modulus, finite points are indistinguishable from INF at
# double precision in the chordal metric; formulas switch to inverted
# coordinates to avoid overflow.
_HUGE = 1e150


def is_inf(p: SpherePoint) -> bool:
    return p is INF


def ensure_point(p) -> SpherePoint:
    """Coerce a number to a valid sphere point, rejecting NaN/float-inf."""
    if p is INF:
        return INF
    z = complex(p)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"not a finite sphere point: {p!r} (use INF for the point at infinity)")
    return z


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal metric 2|p - q| / (sqrt(1+|p|^2) sqrt(1+|q|^2)), extended by
    continuity to infinity.  Symmetric, bounded by 2 (attained by antipodes).
    """
    pi = p is INF
    qi = q is INF
    if pi and qi:
        return 0.0
    if pi:
        return 2.0 / math.hypot(1.0, abs(q))
    if qi:
        return 2.0 / math.hypot(1.0, abs(p))
    ap = abs(p)
    aq = abs(q)
    if ap > _HUGE or aq > _HUGE:
        # |p - q|^2 and 1 + |p|^2 can overflow; rewrite via 1/p (inversion is
        # a chordal isometry, so the identities below are exact).
        if ap > _HUGE and aq > _HUGE:
            u = 1.0 / p
            v = 1.0 / q
            return 2.0 * abs(u - v) / (math.hypot(1.0, abs(u)) * math.hypot(1.0, abs(v)))
        if ap > _HUGE:
            w = 1.0 / p
            return 2.0 * abs(1.0 - w * q) / (math.hypot(abs(w), 1.0) * math.hypot(1.0, aq))
        w = 1.0 / q
        return 2.0 * abs(1.0 - w * p) / (math.hypot(abs(w), 1.0) * math.hypot(1.0, ap))
    return 2.0 * abs(p - q) / (math.hypot(1.0, ap) * math.hypot(1.0, aq))
