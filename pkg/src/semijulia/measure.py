"""Grid-discretized measures, comparison metrics, and convergence diagnostics.

Any finite atomic measure can be binned over a rectangular viewport; mass
falling outside the viewport (including the point at infinity) accumulates
in a dedicated overflow slot so totals stay honest.  Total variation on a
shared grid and Hausdorff distance between point sets are the two computable
surrogates used to compare approximations at fixed resolution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .backward import (
    BackwardOrbit,
    EmptyTail,
    WeightedPointCloud,
    _expand_level_fast,
    _expand_level_scalar,
    _vectorizable,
)
from .ratmap import preimages
from .semigroup import Semigroup, build_index_distribution, validate_assumptions
from .sphere import INF, SpherePoint, chordal_distance, ensure_point, is_inf

__all__ = [
    "ViewportMismatch",
    "EmptySet",
    "Viewport",
    "GridMeasure",
    "bin_cloud",
    "full_tree_grid",
    "total_variation",
    "hausdorff_distance",
    "min_distances",
    "apply_transfer_operator",
    "check_invariance",
    "distance_decay_profile",
    "cesaro_average",
    "circle_chordal_distance",
    "default_test_functions",
    "grid_to_text",
    "grid_from_text",
]


class ViewportMismatch(ValueError):
    """Two grid measures live on different viewports or resolutions."""


class EmptySet(ValueError):
    """A point-set argument that must be nonempty is empty."""


@dataclass(frozen=True)
class Viewport:
    """Axis-aligned window in the plane with a grid resolution."""

    center: complex
    width: float
    height: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", complex(self.center))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("viewport width and height must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid resolution must be at least 1x1")

    @property
    def x0(self) -> float:
        return self.center.real - self.width / 2

    @property
    def y_top(self) -> float:
        return self.center.imag + self.height / 2

    @property
    def cell_width(self) -> float:
        return self.width / self.nx

    @property
    def cell_height(self) -> float:
        return self.height / self.ny


@dataclass(eq=False)
class GridMeasure:
    """Mass per grid cell plus the overflow mass outside the viewport.

    Cells are indexed (row, column) with row 0 at the top edge; each cell is
    half-open, containing its left and top edges.
    """

    viewport: Viewport
    cells: np.ndarray
    outside_mass: float = 0.0

    def __post_init__(self) -> None:
        self.cells = np.asarray(self.cells, dtype=float)
        if self.cells.shape != (self.viewport.ny, self.viewport.nx):
            raise ValueError(
                f"cells shape {self.cells.shape} does not match viewport "
                f"({self.viewport.ny}, {self.viewport.nx})"
            )
        if self.cells.size and float(self.cells.min()) < 0:
            raise ValueError("cell masses must be nonnegative")
        if self.outside_mass < 0:
            raise ValueError("outside_mass must be nonnegative")

    @property
    def total_mass(self) -> float:
        return float(self.cells.sum()) + self.outside_mass


def _split_points(points: Sequence[SpherePoint]) -> tuple[np.ndarray, np.ndarray]:
    """(complex array with INF entries zeroed, boolean finite mask)."""
    try:
        zs = np.asarray(points, dtype=complex)
        return zs, np.ones(len(points), dtype=bool)
    except (TypeError, ValueError):
        pass
    n = len(points)
    zs = np.zeros(n, dtype=complex)
    finite = np.ones(n, dtype=bool)
    for i, p in enumerate(points):
        if p is INF:
            finite[i] = False
        else:
            zs[i] = p
    return zs, finite


def bin_cloud(cloud: WeightedPointCloud, vp: Viewport) -> GridMeasure:
    """Accumulate each atom's mass into the cell containing its point, in
    atom order; atoms outside the viewport or at infinity feed the overflow
    slot."""
    zs, finite = _split_points(cloud.points)
    masses = cloud.masses
    colf = np.floor((zs.real - vp.x0) / vp.cell_width)
    rowf = np.floor((vp.y_top - zs.imag) / vp.cell_height)
    inside = (
        finite & (colf >= 0) & (colf < vp.nx) & (rowf >= 0) & (rowf < vp.ny)
    )
    cells = np.zeros((vp.ny, vp.nx))
    np.add.at(
        cells,
        (rowf[inside].astype(np.int64), colf[inside].astype(np.int64)),
        masses[inside],
    )
    outside = float(masses[~inside].sum())
    return GridMeasure(viewport=vp, cells=cells, outside_mass=outside)


def full_tree_grid(
    sg: Semigroup,
    start: SpherePoint,
    depth: int,
    vp: Viewport,
    *,
    chunk: int = 2**16,
    check_start: bool = True,
) -> GridMeasure:
    """Bin the full backward tree of the given depth without materializing it.

    Levels are expanded whole while they fit within ``chunk`` points; wider
    levels are split branch by branch and descended depth-first, streaming
    each depth-n block straight into the grid.  Live memory stays
    O(chunk * d * n) however large d^n grows.  Equals binning the
    materialized tree up to floating-point summation order.
    """
    start = ensure_point(start)
    if check_start:
        validate_assumptions(sg, start)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    d = sg.total_degree
    dist = build_index_distribution(sg)
    pi = np.asarray(dist.probabilities)
    fast = _vectorizable(sg) and not is_inf(start)
    cells = np.zeros((vp.ny, vp.nx))
    outside = 0.0

    def expand(points):
        if fast:
            return _expand_level_fast(sg, points)
        return _expand_level_scalar(sg, points)

    def bin_block(points, masses: np.ndarray) -> None:
        nonlocal cells, outside
        pts = points.tolist() if fast else list(points)
        g = bin_cloud(WeightedPointCloud(points=pts, masses=masses), vp)
        cells += g.cells
        outside += g.outside_mass

    init = np.array([complex(start)]) if fast else [start]
    stack: list[tuple[object, np.ndarray, int]] = [(init, np.array([1.0]), depth)]
    while stack:
        points, masses, remaining = stack.pop()
        if remaining == 0:
            bin_block(points, masses)
            continue
        size = masses.size
        expanded = expand(points)
        if size * d <= chunk:
            new_masses = np.repeat(masses, d) * np.tile(pi, size)
            stack.append((expanded, new_masses, remaining - 1))
        else:
            # split per branch (children of parent p are contiguous, so
            # branch i across all parents is the stride-d slice at offset i)
            for i in reversed(range(d)):
                child = expanded[i::d].copy() if fast else list(expanded[i::d])
                stack.append((child, masses * pi[i], remaining - 1))
    return GridMeasure(viewport=vp, cells=cells, outside_mass=outside)


def total_variation(g1: GridMeasure, g2: GridMeasure) -> float:
    """Half the L1 distance between cell vectors plus half the overflow
    difference; a metric on measures binned over one shared grid."""
    if g1.viewport != g2.viewport:
        raise ViewportMismatch(
            f"grids live on different viewports: {g1.viewport} vs {g2.viewport}"
        )
    return 0.5 * float(np.abs(g1.cells - g2.cells).sum()) + 0.5 * abs(
        g1.outside_mass - g2.outside_mass
    )


# ---------------------------------------------------------------------------
# chordal geometry on point sets


def _embed(points: Sequence[SpherePoint]) -> np.ndarray:
    """Isometric embedding into R^3: chordal distance = Euclidean distance
    between images on the unit sphere."""
    zs, finite = _split_points(points)
    x = zs.real
    y = zs.imag
    r2 = x * x + y * y
    big = ~finite | (r2 > 1e300)
    s = 1.0 + np.where(big, 1.0, r2)
    out = np.empty((len(points), 3))
    out[:, 0] = np.where(big, 0.0, 2.0 * x / s)
    out[:, 1] = np.where(big, 0.0, 2.0 * y / s)
    out[:, 2] = np.where(big, 1.0, (r2 - 1.0) / s)
    return out


def min_distances(
    points: Sequence[SpherePoint], reference: Sequence[SpherePoint], *, chunk: int = 128
) -> np.ndarray:
    """Chordal distance from each point to the nearest reference point.

    Embedding images are unit vectors, so the nearest reference maximizes the
    dot product; the winning pair is then measured by direct difference, which
    keeps coincident points at exactly zero.  The dot-product screen can
    misrank references closer together than ~1e-8, bounding the result within
    that of the true minimum (from above).
    """
    if len(reference) == 0:
        raise EmptySet("reference set is empty")
    if len(points) == 0:
        return np.empty(0)
    pe = _embed(points)
    re_ = _embed(reference)
    out = np.empty(len(points))
    for i in range(0, len(points), chunk):
        block = pe[i : i + chunk]
        nearest = (block @ re_.T).argmax(axis=1)
        diff = block - re_[nearest]
        out[i : i + chunk] = np.sqrt((diff * diff).sum(axis=1))
    return out


def hausdorff_distance(
    a_points: Sequence[SpherePoint], b_points: Sequence[SpherePoint]
) -> float:
    """max(sup_a dist(a, B), sup_b dist(b, A)) in the chordal metric."""
    if len(a_points) == 0 or len(b_points) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    forward = float(min_distances(a_points, b_points).max())
    backward = float(min_distances(b_points, a_points).max())
    return max(forward, backward)


def circle_chordal_distance(p: SpherePoint, radius: float = 1.0) -> float:
    """Exact chordal distance from a point to the full circle |z| = radius
    (no sampling gap; the minimum is attained at the same argument)."""
    if is_inf(p):
        return 2.0 / math.hypot(1.0, radius)
    r = abs(p)
    return 2.0 * abs(r - radius) / (math.hypot(1.0, r) * math.hypot(1.0, radius))


def distance_decay_profile(
    orbit: BackwardOrbit, reference: Sequence[SpherePoint]
) -> np.ndarray:
    """Chordal distance from each orbit point to the reference set, in step
    order.  Diagnostic only: no monotonicity implied, only eventual
    smallness when the reference approximates the Julia set."""
    if len(reference) == 0:
        raise EmptySet("reference set is empty")
    return min_distances(orbit.points, reference)


# ---------------------------------------------------------------------------
# transfer operator diagnostics


def apply_transfer_operator(
    sg: Semigroup, phi: Callable[[SpherePoint], float], z: SpherePoint
) -> float:
    """Weighted average of phi over all d preimages of z, branch i weighted
    by its probability b_j / d_j; uses the same branch labelling as the
    backward engines."""
    total = 0.0
    for j, g in enumerate(sg.generators):
        w = sg.b.weights[j] / g.degree
        for p in preimages(g, z):
            total += w * phi(p)
    return total


def sphere_re(z: SpherePoint) -> float:
    return 0.0 if is_inf(z) else z.real


def sphere_im(z: SpherePoint) -> float:
    return 0.0 if is_inf(z) else z.imag


def modulus_ratio(z: SpherePoint) -> float:
    """|z|^2 / (1 + |z|^2), extended by 1 at infinity; bounded and continuous
    on the whole sphere."""
    if is_inf(z):
        return 1.0
    r = abs(z)
    if r > 1e150:
        return 1.0
    r2 = r * r
    return r2 / (1.0 + r2)


def _gaussian_bump(center: complex, width: float) -> Callable[[SpherePoint], float]:
    def bump(z: SpherePoint) -> float:
        d = chordal_distance(z, center)
        return math.exp(-((d / width) ** 2))

    return bump


def default_test_functions(
    bump_centers: Sequence[complex] = (1 + 0j, -1 + 0j), bump_width: float = 0.75
) -> list[tuple[str, Callable[[SpherePoint], float]]]:
    """The standard diagnostic test functions: coordinates, a bounded radial
    function, and chordal Gaussian bumps at the given centers."""
    out: list[tuple[str, Callable[[SpherePoint], float]]] = [
        ("re", sphere_re),
        ("im", sphere_im),
        ("modulus_ratio", modulus_ratio),
    ]
    for c in bump_centers:
        out.append((f"bump@{c.real:g}{c.imag:+g}j", _gaussian_bump(c, bump_width)))
    return out


def check_invariance(
    sg: Semigroup,
    cloud: WeightedPointCloud,
    phis: Sequence[tuple[str, Callable[[SpherePoint], float]]],
    rng: np.random.Generator | None = None,
    *,
    max_atoms: int = 200_000,
) -> dict[str, float]:
    """|<T phi, mu> - <phi, mu>| for each named test function phi, where T
    averages phi over weighted preimages.  Small values certify approximate
    invariance of the empirical measure under the adjoint of T.

    Clouds larger than ``max_atoms`` are subsampled (mass-weighted, with
    replacement) when a generator is supplied; preimages are computed once
    per atom and shared across all test functions.
    """
    n = len(cloud.points)
    if n == 0:
        raise EmptySet("cannot check invariance of an empty cloud")
    total = cloud.total_mass
    if rng is not None and n > max_atoms:
        p = cloud.masses / total
        idx = rng.choice(n, size=max_atoms, p=p)
        points = [cloud.points[i] for i in idx]
        weights = np.full(max_atoms, total / max_atoms)
    else:
        points = cloud.points
        weights = cloud.masses
    branch_w = [sg.b.weights[j] / g.degree for j, g in enumerate(sg.generators)]
    acc = {name: 0.0 for name, _ in phis}
    for z, w in zip(points, weights):
        pres = [preimages(g, z) for g in sg.generators]
        for name, phi in phis:
            t = 0.0
            for j, plist in enumerate(pres):
                bw = branch_w[j]
                for pz in plist:
                    t += bw * phi(pz)
            acc[name] += w * (t - phi(z))
    return {name: abs(v) / total for name, v in acc.items()}


def cesaro_average(
    orbit: BackwardOrbit, phi: Callable[[SpherePoint], float], burn_in: int = 0
) -> float:
    """Time average of phi along the orbit after a burn-in prefix."""
    pts = orbit.points[burn_in:]
    if not pts:
        raise EmptyTail(f"burn_in {burn_in} >= orbit length {len(orbit.points)}")
    return sum(phi(z) for z in pts) / len(pts)


# ---------------------------------------------------------------------------
# stable text export


def _fmt(x: float) -> str:
    return repr(float(x))


def grid_to_text(g: GridMeasure) -> str:
    """Stable plain-text serialization: header lines (viewport, resolution,
    overflow) then one row of cell values per line.  Byte-identical for
    identical grids, suitable for cross-run diffing."""
    vp = g.viewport
    lines = [
        "semijulia-grid 1",
        f"center {_fmt(vp.center.real)} {_fmt(vp.center.imag)}",
        f"size {_fmt(vp.width)} {_fmt(vp.height)}",
        f"resolution {vp.nx} {vp.ny}",
        f"outside {_fmt(g.outside_mass)}",
    ]
    for row in g.cells:
        lines.append(" ".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def grid_from_text(text: str) -> GridMeasure:
    """Inverse of :func:`grid_to_text`."""
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("semijulia-grid"):
        raise ValueError("not a semijulia grid export")
    header = {}
    for ln in lines[1:5]:
        key, *vals = ln.split()
        header[key] = vals
    cre, cim = (float(v) for v in header["center"])
    w, h = (float(v) for v in header["size"])
    nx, ny = (int(v) for v in header["resolution"])
    outside = float(header["outside"][0])
    vp = Viewport(center=complex(cre, cim), width=w, height=h, nx=nx, ny=ny)
    rows = [[float(v) for v in ln.split()] for ln in lines[5 : 5 + ny]]
    return GridMeasure(viewport=vp, cells=np.asarray(rows), outside_mass=outside)
