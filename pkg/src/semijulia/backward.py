"""The two backward-iteration engines.

Full method: expand every preimage word of a fixed length n, weighting the
atom of word (i_1, ..., i_n) by the product of its branch probabilities;
the d^n weighted atoms form a probability measure converging (weakly, in n)
to the canonical invariant measure on the Julia set.

Random method: a Markov chain that at each step recomputes all d preimages
of the current point and jumps to one of them drawn from the branch
distribution; the chain's time-average (empirical measure, after a burn-in)
converges to the same limit almost surely.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ratmap import preimages
from .semigroup import (
    IndexDistribution,
    Semigroup,
    build_index_distribution,
    make_rng,
    validate_assumptions,
)
from .sphere import SpherePoint, ensure_point, is_inf

__all__ = [
    "BudgetExceeded",
    "EmptyTail",
    "WeightedPointCloud",
    "BackwardOrbit",
    "DEFAULT_ATOM_BUDGET",
    "DEFAULT_BURN_IN",
    "full_backward_tree",
    "random_backward_orbit",
    "empirical_measure",
    "run_chains",
]

DEFAULT_ATOM_BUDGET = 2**24
DEFAULT_BURN_IN = 100


class BudgetExceeded(RuntimeError):
    """d^n atoms would not fit the configured memory budget."""


class EmptyTail(ValueError):
    """Burn-in swallowed the whole orbit."""


@dataclass(eq=False)
class WeightedPointCloud:
    """Finite atomic measure: points with matching nonnegative masses."""

    points: list[SpherePoint]
    masses: np.ndarray

    def __post_init__(self) -> None:
        self.masses = np.asarray(self.masses, dtype=float)
        if self.masses.ndim != 1 or len(self.points) != self.masses.size:
            raise ValueError(
                f"{len(self.points)} points vs {self.masses.size} masses"
            )
        if self.masses.size and float(self.masses.min()) < 0:
            raise ValueError("masses must be nonnegative")

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class BackwardOrbit:
    """One realization of the random backward chain.

    ``points[m]`` is the chain state after m+1 steps; it is the branch
    ``symbols[m]`` preimage of ``points[m-1]`` (of ``start`` for m = 0).
    """

    start: SpherePoint
    symbols: list[int]
    points: list[SpherePoint]
    seed: int

    def __post_init__(self) -> None:
        if len(self.symbols) != len(self.points):
            raise ValueError("symbols and points must have equal length")

    def __len__(self) -> int:
        return len(self.points)


# ---------------------------------------------------------------------------
# full backward tree


def _vectorizable(sg: Semigroup) -> bool:
    return all(
        g.denominator.degree == 0 and g.degree <= 2 for g in sg.generators
    )


def _expand_level_fast(sg: Semigroup, zs: np.ndarray) -> np.ndarray:
    """One tree level for polynomial generators of degree <= 2, vectorized.

    Column order matches the scalar branch labelling: per generator, roots
    sorted by (real, imag).
    """
    cols: list[np.ndarray] = []
    for g in sg.generators:
        b0 = g._den_padded[0]
        c0 = g._num_padded[0] - zs * b0
        c1 = g._num_padded[1]
        if g.degree == 1:
            cols.append(-c0 / c1)
            continue
        a = g._num_padded[2]
        b = c1
        disc = b * b - 4.0 * a * c0
        s = np.sqrt(disc)
        flip = (b.real * s.real + b.imag * s.imag) < 0
        s = np.where(flip, -s, s)
        q = -0.5 * (b + s)
        zero_c = c0 == 0
        safe_q = np.where(zero_c, 1.0, q)
        r1 = np.where(zero_c, 0.0 + 0.0j, q / a)
        r2 = np.where(zero_c, -b / a, c0 / safe_q)
        swap = (r2.real < r1.real) | ((r2.real == r1.real) & (r2.imag < r1.imag))
        lo = np.where(swap, r2, r1)
        hi = np.where(swap, r1, r2)
        cols.append(lo)
        cols.append(hi)
    return np.stack(cols, axis=1).reshape(-1)


def _expand_level_scalar(
    sg: Semigroup, pts: list[SpherePoint]
) -> list[SpherePoint]:
    out: list[SpherePoint] = []
    for p in pts:
        for g in sg.generators:
            out.extend(preimages(g, p))
    return out


def full_backward_tree(
    sg: Semigroup,
    start: SpherePoint,
    depth: int,
    *,
    max_atoms: int = DEFAULT_ATOM_BUDGET,
    check_start: bool = True,
) -> WeightedPointCloud:
    """All d^depth preimage words of the start point, built level by level:
    each level is the full set of d preimages of every point of the previous
    one.  The atom of word (i_1, ..., i_n) carries mass prod_m pi(i_m); atoms
    are listed parent-major so children of one parent are contiguous in
    branch order.
    """
    start = ensure_point(start)
    if check_start:
        validate_assumptions(sg, start)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    d = sg.total_degree
    if d**depth > max_atoms:
        raise BudgetExceeded(
            f"{d}^{depth} atoms exceed the budget of {max_atoms}; "
            "lower the depth or raise max_atoms"
        )
    dist = build_index_distribution(sg)
    pi = np.asarray(dist.probabilities)

    masses = np.array([1.0])
    if _vectorizable(sg) and not is_inf(start):
        level = np.array([complex(start)])
        for _ in range(depth):
            level = _expand_level_fast(sg, level)
            masses = np.repeat(masses, d) * np.tile(pi, masses.size)
        points = level.tolist()
    else:
        points_l: list[SpherePoint] = [start]
        for _ in range(depth):
            points_l = _expand_level_scalar(sg, points_l)
            masses = np.repeat(masses, d) * np.tile(pi, masses.size)
        points = points_l
    return WeightedPointCloud(points=list(points), masses=masses)


# ---------------------------------------------------------------------------
# random backward chain


def random_backward_orbit(
    sg: Semigroup,
    start: SpherePoint,
    n: int,
    seed: int,
    *,
    dist: IndexDistribution | None = None,
    check_start: bool = True,
) -> BackwardOrbit:
    """Length-n random backward orbit: symbols drawn i.i.d. from the branch
    distribution, each step recomputing all preimages of the current point
    and selecting the decoded branch.  Deterministic given the seed.
    """
    start = ensure_point(start)
    if check_start:
        validate_assumptions(sg, start)
    if n < 1:
        raise ValueError("orbit length must be >= 1")
    if dist is None:
        dist = build_index_distribution(sg)
    rng = make_rng(seed)
    u = rng.random(n)
    cum = np.asarray(dist.cumulative)
    symbols = np.minimum(
        np.searchsorted(cum, u, side="right"), len(dist.probabilities) - 1
    ).tolist()
    decode = dist.decode
    gens = sg.generators
    pts: list[SpherePoint] = []
    append = pts.append
    z = start
    for i in symbols:
        j, r = decode[i]
        z = preimages(gens[j], z)[r]
        append(z)
    return BackwardOrbit(start=start, symbols=symbols, points=pts, seed=seed)


def empirical_measure(orbit: BackwardOrbit, burn_in: int) -> WeightedPointCloud:
    """Uniform mass on the orbit points after dropping the first ``burn_in``
    of them; with burn_in = 0 this is exactly the orbit's time average."""
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    n = len(orbit.points)
    if burn_in >= n:
        raise EmptyTail(f"burn_in {burn_in} >= orbit length {n}")
    tail = orbit.points[burn_in:]
    return WeightedPointCloud(
        points=list(tail), masses=np.full(len(tail), 1.0 / len(tail))
    )


def run_chains(
    sg: Semigroup,
    start: SpherePoint,
    n_per_chain: int,
    n_chains: int,
    burn_in: int = DEFAULT_BURN_IN,
    seeds: Sequence[int] | None = None,
    *,
    check_start: bool = True,
) -> WeightedPointCloud:
    """Average of the empirical measures of independent chains, merged in
    seed order regardless of execution order.  With one chain this is exactly
    :func:`empirical_measure` of that chain.
    """
    if seeds is None:
        seeds = list(range(n_chains))
    seeds = [int(s) for s in seeds]
    if len(seeds) != n_chains:
        raise ValueError(f"{n_chains} chains need {n_chains} seeds, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ValueError(f"seeds must be pairwise distinct, got {seeds}")
    start = ensure_point(start)
    if check_start:
        validate_assumptions(sg, start)
    dist = build_index_distribution(sg)
    points: list[SpherePoint] = []
    mass_parts: list[np.ndarray] = []
    for seed in seeds:
        orbit = random_backward_orbit(
            sg, start, n_per_chain, seed, dist=dist, check_start=False
        )
        cloud = empirical_measure(orbit, burn_in)
        points.extend(cloud.points)
        mass_parts.append(cloud.masses / n_chains)
    return WeightedPointCloud(points=points, masses=np.concatenate(mass_parts))
