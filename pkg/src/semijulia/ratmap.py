"""Rational maps on the sphere: evaluation and preimage computation.

A map is a ratio of complex polynomials with no common root.  Its degree-d
preimage list of any sphere point always has exactly d entries (multiple
roots repeated, the point at infinity padded in when the preimage equation
drops degree), ordered deterministically by (real, imag) with infinity last.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from .sphere import INF, SpherePoint, chordal_distance, is_inf

__all__ = [
    "SolverDivergence",
    "Polynomial",
    "RationalMap",
    "polynomial_roots",
    "evaluate",
    "preimages",
]

# Relative threshold below which a leading coefficient is considered to have
# cancelled (degree drop; the missing roots sit at infinity).
_LEAD_DROP = 1e-14

_RESIDUAL_TOL = 1e-12
_MAX_SWEEPS = 500


class SolverDivergence(RuntimeError):
    """Simultaneous root iteration failed to reach residual tolerance."""

    def __init__(self, coeffs: Sequence[complex], sweeps: int):
        self.coeffs = tuple(coeffs)
        super().__init__(
            f"root finder did not converge within {sweeps} sweeps; "
            f"ill-conditioned polynomial with coefficients {list(coeffs)!r}"
        )


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial, coefficients in ascending order, leading one nonzero."""

    coeffs: tuple[complex, ...]

    def __init__(self, coeffs: Sequence[complex]):
        cs = [complex(c) for c in coeffs]
        for c in cs:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite polynomial coefficient {c!r}")
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs or cs == [0j]:
            raise ValueError("polynomial must have a nonzero coefficient")
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc


def _horner(coeffs: Sequence[complex], z: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _quadratic_roots(a: complex, b: complex, c: complex) -> list[complex]:
    """Both roots of a z^2 + b z + c (a != 0), numerically stable form."""
    if c == 0:
        return [0j, -b / a]
    s = cmath.sqrt(b * b - 4 * a * c)
    # pick the sign that avoids cancellation in b + s
    if b.real * s.real + b.imag * s.imag >= 0:
        q = -0.5 * (b + s)
    else:
        q = -0.5 * (b - s)
    # q == 0 would force c == 0, handled above
    return [q / a, c / q]


def _aberth_roots(coeffs: Sequence[complex]) -> list[complex]:
    """All roots of a degree >= 3 polynomial by simultaneous (Ehrlich-Aberth)
    iteration with one Newton polish per root.

    Multiple roots come out as tight clusters of repeated values, which is
    exactly what callers counting preimages with multiplicity need.
    """
    n = len(coeffs) - 1
    lead = coeffs[-1]
    monic = [c / lead for c in coeffs]
    deriv = [k * monic[k] for k in range(1, n + 1)]
    radius = 1.0 + max(abs(c) for c in monic[:-1])
    xs = [radius * cmath.exp(1j * (2 * math.pi * k / n + 0.4)) for k in range(n)]

    coeff_mag = [abs(c) for c in monic]
    converged = False
    for _ in range(_MAX_SWEEPS):
        offsets = []
        all_small = True
        for i in range(n):
            x = xs[i]
            p = _horner(monic, x)
            # backward-error residual scale: sum |c_k| |x|^k
            ax = abs(x)
            scale = 0.0
            for m in reversed(coeff_mag):
                scale = scale * ax + m
            if abs(p) > _RESIDUAL_TOL * max(scale, 1.0):
                all_small = False
            dp = _horner(deriv, x)
            if dp == 0:
                offsets.append(radius * 1e-6)
                continue
            newton = p / dp
            acc = 0j
            for j in range(n):
                if j != i:
                    diff = x - xs[j]
                    if diff == 0:
                        diff = 1e-12 * (1 + abs(x))
                    acc += 1.0 / diff
            denom = 1.0 - newton * acc
            offsets.append(newton if denom == 0 else newton / denom)
        if all_small:
            converged = True
            break
        xs = [x - w for x, w in zip(xs, offsets)]
    if not converged:
        # final residual check; the loop may have exited right at the budget
        for x in xs:
            ax = abs(x)
            scale = 0.0
            for m in reversed(coeff_mag):
                scale = scale * ax + m
            if abs(_horner(monic, x)) > _RESIDUAL_TOL * max(scale, 1.0):
                raise SolverDivergence(coeffs, _MAX_SWEEPS)

    polished = []
    for x in xs:
        dp = _horner(deriv, x)
        if dp != 0:
            x = x - _horner(monic, x) / dp
        polished.append(x)
    return polished


def polynomial_roots(coeffs: Sequence[complex]) -> list[complex]:
    """All complex roots of the polynomial with the given ascending
    coefficients, repeated with multiplicity.  Closed forms for degree <= 2,
    simultaneous iteration above that.
    """
    cs = list(coeffs)
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if n <= 0:
        return []
    if n == 1:
        return [-cs[0] / cs[1]]
    if n == 2:
        return _quadratic_roots(cs[2], cs[1], cs[0])
    return _aberth_roots(cs)


@dataclass
class RationalMap:
    """Ratio of two polynomials sharing no root; degree = max of the two."""

    numerator: Polynomial
    denominator: Polynomial
    degree: int = field(init=False)

    def __post_init__(self) -> None:
        dn = self.numerator.degree
        dd = self.denominator.degree
        self.degree = max(dn, dd)
        if self.degree < 1:
            raise ValueError("rational map must have degree >= 1")
        if dn >= 1 and dd >= 1:
            nroots = polynomial_roots(self.numerator.coeffs)
            droots = polynomial_roots(self.denominator.coeffs)
            for r in nroots:
                for s in droots:
                    if chordal_distance(r, s) <= 1e-10:
                        raise ValueError(
                            f"numerator and denominator share a root near {r!r}"
                        )
        pad = self.degree + 1
        nc = list(self.numerator.coeffs) + [0j] * (pad - len(self.numerator.coeffs))
        dc = list(self.denominator.coeffs) + [0j] * (pad - len(self.denominator.coeffs))
        self._num_padded = tuple(nc)
        self._den_padded = tuple(dc)
        # reversed coefficients for evaluation at large |z| via u = 1/z
        self._num_rev = tuple(reversed(self.numerator.coeffs))
        self._den_rev = tuple(reversed(self.denominator.coeffs))


def rational_map(num_coeffs: Sequence[complex], den_coeffs: Sequence[complex] = (1,)) -> RationalMap:
    """Convenience constructor from raw coefficient lists (ascending order)."""
    return RationalMap(Polynomial(num_coeffs), Polynomial(den_coeffs))


def evaluate(f: RationalMap, z: SpherePoint) -> SpherePoint:
    """Apply f as a map of the sphere.

    At infinity the value is decided by the degree comparison of numerator
    and denominator; a vanishing denominator at finite z gives infinity
    (legitimate: the two polynomials share no root).  Large finite arguments
    are evaluated through u = 1/z so overflow never produces NaN.
    """
    if is_inf(z):
        dn = f.numerator.degree
        dd = f.denominator.degree
        if dn > dd:
            return INF
        if dn < dd:
            return 0j
        return f.numerator.coeffs[-1] / f.denominator.coeffs[-1]
    az = abs(z)
    if az <= 1.0:
        den = _horner(f.denominator.coeffs, z)
        if den == 0:
            return INF
        num = _horner(f.numerator.coeffs, z)
        w = num / den
        if math.isfinite(w.real) and math.isfinite(w.imag):
            return w
        return INF
    u = 1.0 / z
    rnum = _horner(f._num_rev, u)
    rden = _horner(f._den_rev, u)
    if rden == 0:
        return INF
    val = rnum / rden
    diff = f.numerator.degree - f.denominator.degree
    if diff == 0:
        w = val
    elif diff > 0:
        if val == 0:
            return 0j
        if diff * math.log10(az) > 300.0:
            # z**diff would overflow on its own; go through log-polar form
            m = diff * math.log(az) + math.log(abs(val))
            if m > 709.0:
                return INF
            theta = diff * cmath.phase(z) + cmath.phase(val)
            w = cmath.rect(math.exp(m), theta)
        else:
            w = z**diff * val
    else:
        w = u ** (-diff) * val
    if math.isfinite(w.real) and math.isfinite(w.imag):
        return w
    return INF


def _sorted_with_padding(finite: list[complex], degree: int) -> list[SpherePoint]:
    finite.sort(key=lambda w: (w.real, w.imag))
    out: list[SpherePoint] = list(finite)
    out.extend([INF] * (degree - len(finite)))
    return out


def preimages(f: RationalMap, z: SpherePoint) -> list[SpherePoint]:
    """All degree(f) solutions w of f(w) = z, with multiplicity.

    Solves numerator(w) - z * denominator(w) = 0; each leading coefficient
    that cancels moves one solution to infinity.  For z at infinity the
    solutions are the denominator roots, padded with infinity.  The list
    order (sorted by real then imaginary part, infinity last) is the fixed
    branch labelling used everywhere else.
    """
    d = f.degree
    if is_inf(z):
        if f.denominator.degree >= 1:
            finite = polynomial_roots(f.denominator.coeffs)
        else:
            finite = []
        return _sorted_with_padding(finite, d)
    nc = f._num_padded
    dc = f._den_padded
    coeffs = [nc[k] - z * dc[k] for k in range(d + 1)]
    top = len(coeffs) - 1
    maxmag = max(abs(c) for c in coeffs)
    if maxmag == 0.0:
        # cannot happen for a genuine degree >= 1 map; guard for totality
        return [INF] * d
    cut = _LEAD_DROP * maxmag
    while top > 0 and abs(coeffs[top]) <= cut:
        top -= 1
    if top == 0 or abs(coeffs[top]) <= cut:
        return [INF] * d
    finite = polynomial_roots(coeffs[: top + 1])
    return _sorted_with_padding(finite, d)
