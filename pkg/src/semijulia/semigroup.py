"""Finitely generated rational semigroups, branch-index distributions, and
start-point validation.

The d = d_1 + ... + d_k preimage branches of the k generators are labelled
by a single index with block structure: branches of generator j occupy one
contiguous block and all carry probability b_j / d_j.  Equal weights within
a block are structural here (the type cannot represent anything else);
unequal same-map weights would wreck the continuity the sampling theory
rests on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .ratmap import RationalMap, polynomial_roots
from .sphere import INF, SpherePoint, chordal_distance, ensure_point, is_inf

__all__ = [
    "ExceptionalStartPoint",
    "ProbabilityVector",
    "Semigroup",
    "IndexDistribution",
    "build_index_distribution",
    "make_rng",
    "sample_branch",
    "sample_branch_block",
    "exceptional_candidates",
    "validate_assumptions",
    "AssumptionsReport",
]


class ExceptionalStartPoint(ValueError):
    """The requested start point has a finite total backward orbit; every
    backward iteration from it is trapped and approximates nothing."""


@dataclass(frozen=True)
class ProbabilityVector:
    """Strictly positive weights summing to 1 (renormalized to an exact
    floating-point sum on construction; input must already sum to 1 within
    1e-12)."""

    weights: tuple[float, ...]

    def __init__(self, weights: Sequence[float]):
        ws = [float(w) for w in weights]
        if not ws:
            raise ValueError("probability vector must be nonempty")
        if any(not math.isfinite(w) or w <= 0 for w in ws):
            raise ValueError(f"weights must be strictly positive, got {ws}")
        total = sum(ws)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total!r}, expected 1 within 1e-12")
        ws = [w / total for w in ws]
        # pin the float sum to exactly 1.0
        ws[-1] = 1.0 - sum(ws[:-1])
        object.__setattr__(self, "weights", tuple(ws))

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, k: int) -> "ProbabilityVector":
        return cls([1.0 / k] * k)


@dataclass
class Semigroup:
    """Generators with an attached probability vector (default uniform).

    At least one generator must have degree two or more; the total degree d
    is the sum of the generator degrees.
    """

    generators: tuple[RationalMap, ...]
    b: ProbabilityVector | None = None
    total_degree: int = field(init=False)

    def __post_init__(self) -> None:
        self.generators = tuple(self.generators)
        if not self.generators:
            raise ValueError("semigroup needs at least one generator")
        if self.b is None:
            self.b = ProbabilityVector.uniform(len(self.generators))
        if len(self.b) != len(self.generators):
            raise ValueError(
                f"probability vector has {len(self.b)} weights for "
                f"{len(self.generators)} generators"
            )
        if max(g.degree for g in self.generators) < 2:
            raise ValueError("semigroup must contain a generator of degree >= 2")
        self.total_degree = sum(g.degree for g in self.generators)


@dataclass(frozen=True)
class IndexDistribution:
    """Distribution over the d branch indices with its decoding table.

    ``decode[i]`` is the pair (generator index, branch within generator),
    both 0-based; ``cumulative`` is the running-sum table used for sampling
    (last entry pinned to 1.0).
    """

    probabilities: tuple[float, ...]
    decode: tuple[tuple[int, int], ...]
    cumulative: tuple[float, ...]


def build_index_distribution(sg: Semigroup) -> IndexDistribution:
    """Block-structured branch distribution: probability b_j / d_j for each
    of the d_j branches of generator j.  When b_j = d_j / d for all j this
    is the uniform distribution 1/d."""
    probs: list[float] = []
    decode: list[tuple[int, int]] = []
    for j, g in enumerate(sg.generators):
        w = sg.b.weights[j] / g.degree
        for r in range(g.degree):
            probs.append(w)
            decode.append((j, r))
    cum: list[float] = []
    acc = 0.0
    for p in probs:
        acc += p
        cum.append(acc)
    cum[-1] = 1.0
    return IndexDistribution(tuple(probs), tuple(decode), tuple(cum))


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide generator: counter-based Philox keyed by the seed.
    All sampling goes through instances of this, never a global state."""
    return np.random.Generator(np.random.Philox(seed))


def sample_branch(dist: IndexDistribution, rng: np.random.Generator) -> int:
    """Draw one branch index (0-based) with probability dist.probabilities[i],
    advancing the supplied generator state.  One uniform draw against the
    cumulative table; equivalent to picking a generator with probability b_j
    and then one of its branches uniformly."""
    u = rng.random()
    i = int(np.searchsorted(np.asarray(dist.cumulative), u, side="right"))
    return min(i, len(dist.probabilities) - 1)


def sample_branch_block(
    dist: IndexDistribution, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Vector of n branch indices; consumes the identical generator stream as
    n successive :func:`sample_branch` calls."""
    u = rng.random(n)
    idx = np.searchsorted(np.asarray(dist.cumulative), u, side="right")
    return np.minimum(idx, len(dist.probabilities) - 1)


# ---------------------------------------------------------------------------
# start-point validation


def _fixed_points(f: RationalMap) -> list[SpherePoint]:
    """Fixed points of f on the sphere (roots of num - z*den, plus infinity
    when the numerator degree dominates)."""
    nc = list(f.numerator.coeffs)
    dc = list(f.denominator.coeffs)
    size = max(len(nc), len(dc) + 1)
    coeffs = [0j] * size
    for k, c in enumerate(nc):
        coeffs[k] += c
    for k, c in enumerate(dc):
        coeffs[k + 1] -= c
    maxmag = max(abs(c) for c in coeffs)
    while len(coeffs) > 1 and abs(coeffs[-1]) <= 1e-14 * maxmag:
        coeffs.pop()
    pts: list[SpherePoint] = []
    if len(coeffs) > 1:
        pts.extend(polynomial_roots(coeffs))
    if f.numerator.degree > f.denominator.degree:
        pts.append(INF)
    return pts


def _totally_ramified(f: RationalMap, w: SpherePoint) -> bool:
    """True when every one of the degree(f) preimages of w equals w.

    Checked algebraically: the preimage polynomial num - w*den must be a
    constant multiple of (x - w)^degree (coefficientwise within a relative
    1e-6; root clustering of high multiplicity makes a direct root-based
    comparison far too blunt).  For w at infinity the condition is a
    constant denominator.
    """
    d = f.degree
    if is_inf(w):
        return f.denominator.degree == 0
    coeffs = [f._num_padded[k] - w * f._den_padded[k] for k in range(d + 1)]
    maxmag = max(abs(c) for c in coeffs)
    if maxmag == 0.0:
        return False
    lead = coeffs[d]
    if abs(lead) <= 1e-12 * maxmag:
        return False  # degree drop: some preimage is at infinity, not w
    # target = lead * (x - w)^d
    target = [lead * math.comb(d, k) * (-w) ** (d - k) for k in range(d + 1)]
    tol = 1e-6 * max(maxmag, max(abs(t) for t in target))
    return all(abs(coeffs[k] - target[k]) <= tol for k in range(d + 1))


def exceptional_candidates(sg: Semigroup) -> list[SpherePoint]:
    """Heuristic scan for points whose total backward orbit is finite:
    fixed points of some generator at which every generator is totally
    ramified.  Complete for the common cases (e.g. 0 and infinity for
    monomial-like generators); not a general decision procedure.
    """
    pool: list[SpherePoint] = []
    for g in sg.generators:
        for w in _fixed_points(g):
            if all(chordal_distance(w, seen) > 1e-9 for seen in pool):
                pool.append(w)
    out: list[SpherePoint] = []
    for w in pool:
        if all(_totally_ramified(g, w) for g in sg.generators):
            out.append(w)
    return out


@dataclass
class AssumptionsReport:
    """What could and could not be checked about a semigroup/start pair."""

    has_degree_two_generator: bool
    candidates: tuple[SpherePoint, ...]
    start: SpherePoint
    start_is_exceptional: bool
    unverified: tuple[str, ...]

    def as_text(self) -> str:
        lines = [
            f"degree >= 2 generator present: {'PASS' if self.has_degree_two_generator else 'FAIL'}",
            f"exceptional-point candidates: {list(self.candidates)!r}",
            f"start point {self.start!r} exceptional: "
            + ("YES" if self.start_is_exceptional else "no (heuristic scan)"),
        ]
        for item in self.unverified:
            lines.append(f"UNVERIFIED (user-asserted): {item}")
        return "\n".join(lines)


_UNVERIFIED = (
    "exceptional set contained in the Fatou set",
    "inverses of degree-one elements form a family normal on the Julia set",
)


def validate_assumptions(sg: Semigroup, start: SpherePoint) -> AssumptionsReport:
    """Check what is decidable about the standing assumptions and the start
    point; raises :class:`ExceptionalStartPoint` if the start is within
    chordal 1e-9 of a candidate exceptional point (its backward orbit would
    be trapped forever)."""
    start = ensure_point(start)
    candidates = exceptional_candidates(sg)
    hit = any(chordal_distance(start, w) <= 1e-9 for w in candidates)
    report = AssumptionsReport(
        has_degree_two_generator=max(g.degree for g in sg.generators) >= 2,
        candidates=tuple(candidates),
        start=start,
        start_is_exceptional=hit,
        unverified=_UNVERIFIED,
    )
    if hit:
        raise ExceptionalStartPoint(
            f"start point {start!r} matches an exceptional-point candidate "
            f"(candidates: {list(candidates)!r}); backward orbits from it are trapped"
        )
    return report
