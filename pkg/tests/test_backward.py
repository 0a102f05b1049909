import numpy as np
import pytest

from semijulia.backward import (
    BudgetExceeded,
    EmptyTail,
    WeightedPointCloud,
    _expand_level_fast,
    _expand_level_scalar,
    empirical_measure,
    full_backward_tree,
    random_backward_orbit,
    run_chains,
)
from semijulia.measure import Viewport, bin_cloud, cesaro_average
from semijulia.ratmap import evaluate, preimages, rational_map
from semijulia.semigroup import ProbabilityVector, Semigroup, build_index_distribution
from semijulia.sphere import chordal_distance


def square_sg():
    return Semigroup((rational_map([0, 0, 1]),))


def annulus_sg():
    return Semigroup(
        (rational_map([0, 0, 1]), rational_map([0, 0, 0.25])),
        ProbabilityVector([0.5, 0.5]),
    )


def as_sorted_pairs(points):
    return sorted((round(p.real, 9), round(p.imag, 9)) for p in points)


def assert_multisets_close(xs, ys, tol=1e-9):
    # greedy nearest matching; robust to 1-ulp ties that break sort order
    assert len(xs) == len(ys)
    remaining = list(ys)
    for x in xs:
        dists = [chordal_distance(x, y) for y in remaining]
        k = min(range(len(dists)), key=dists.__getitem__)
        assert dists[k] <= tol, f"{x} has no partner within {tol}"
        remaining.pop(k)


# ---------------------------------------------------------------------------
# full backward tree


def test_tree_depth_one_square():
    cloud = full_backward_tree(square_sg(), 1, 1)
    assert as_sorted_pairs(cloud.points) == [(-1.0, 0.0), (1.0, -0.0)]
    assert np.allclose(cloud.masses, 0.5)


def test_tree_depth_two_square():
    cloud = full_backward_tree(square_sg(), 1, 2)
    assert as_sorted_pairs(cloud.points) == [
        (-1.0, 0.0),
        (-0.0, -1.0),
        (-0.0, 1.0),
        (1.0, -0.0),
    ]
    assert np.allclose(cloud.masses, 0.25)


def test_tree_depth_one_two_generators():
    cloud = full_backward_tree(annulus_sg(), 1, 1)
    assert as_sorted_pairs(cloud.points) == [
        (-2.0, 0.0),
        (-1.0, 0.0),
        (1.0, -0.0),
        (2.0, -0.0),
    ]
    assert np.allclose(cloud.masses, 0.25)


@pytest.mark.parametrize("depth", [0, 1, 3, 6])
def test_tree_mass_conservation(depth):
    sg = Semigroup(
        (rational_map([0, 0, 1]), rational_map([0.1, 0, 0, 1])),
        ProbabilityVector([0.3, 0.7]),
    )
    cloud = full_backward_tree(sg, 1, depth)
    assert len(cloud) == sg.total_degree**depth
    assert abs(cloud.total_mass - 1.0) <= 1e-9


def test_tree_level_recursion():
    # level m+1 is the multiset of all branch preimages of level m
    sg = annulus_sg()
    lvl2 = full_backward_tree(sg, 1, 2)
    lvl3 = full_backward_tree(sg, 1, 3)
    expanded = []
    for p in lvl2.points:
        for g in sg.generators:
            expanded.extend(preimages(g, p))
    assert_multisets_close(expanded, lvl3.points)


def test_tree_forward_consistency():
    sg = annulus_sg()
    dist = build_index_distribution(sg)
    d = sg.total_degree
    parents = full_backward_tree(sg, 1, 2)
    children = full_backward_tree(sg, 1, 3)
    for idx, w in enumerate(children.points):
        parent = parents.points[idx // d]
        j, _ = dist.decode[idx % d]
        assert chordal_distance(evaluate(sg.generators[j], w), parent) <= 1e-9


def test_scalar_and_vectorized_expansion_agree():
    # children of each parent must agree as multisets; same-generator
    # branches carry equal mass, so intra-block order is immaterial
    sg = annulus_sg()
    d = sg.total_degree
    pts = [1 + 0j, 0.5 - 0.25j, -2 + 1j, 0.01 + 3j]
    fast = _expand_level_fast(sg, np.asarray(pts, dtype=complex)).tolist()
    slow = _expand_level_scalar(sg, pts)
    assert len(fast) == len(slow)
    for k in range(len(pts)):
        assert_multisets_close(fast[k * d : (k + 1) * d], slow[k * d : (k + 1) * d])


def test_scalar_path_used_for_rational_generators():
    # a genuinely rational generator disables the vectorized climb
    sg = Semigroup(
        (rational_map([0, 0, 1]), rational_map([1, 0, 1], [0, 1])),  # (z^2+1)/z
        ProbabilityVector([0.5, 0.5]),
    )
    cloud = full_backward_tree(sg, 1, 2, check_start=False)
    assert len(cloud) == 16
    assert abs(cloud.total_mass - 1.0) <= 1e-9


def test_tree_budget():
    with pytest.raises(BudgetExceeded):
        full_backward_tree(square_sg(), 1, 8, max_atoms=100)


def test_tree_rejects_exceptional_start():
    from semijulia.semigroup import ExceptionalStartPoint

    with pytest.raises(ExceptionalStartPoint):
        full_backward_tree(square_sg(), 0, 3)


# ---------------------------------------------------------------------------
# random backward orbit


def test_orbit_stays_on_unit_circle():
    orbit = random_backward_orbit(square_sg(), 1, 100, seed=5)
    for z in orbit.points:
        assert abs(abs(z) - 1.0) <= 1e-9


def test_orbit_modulus_decay_from_outside():
    orbit = random_backward_orbit(square_sg(), 3, 40, seed=11)
    assert abs(abs(orbit.points[-1]) - 1.0) <= 1e-9


def test_orbit_determinism():
    a = random_backward_orbit(annulus_sg(), 1, 500, seed=42)
    b = random_backward_orbit(annulus_sg(), 1, 500, seed=42)
    assert a.symbols == b.symbols
    assert a.points == b.points
    c = random_backward_orbit(annulus_sg(), 1, 500, seed=43)
    assert c.symbols != a.symbols


def test_orbit_forward_consistency():
    sg = annulus_sg()
    dist = build_index_distribution(sg)
    orbit = random_backward_orbit(sg, 1, 300, seed=3)
    prev = orbit.start
    for sym, z in zip(orbit.symbols, orbit.points):
        j, r = dist.decode[sym]
        assert chordal_distance(evaluate(sg.generators[j], z), prev) <= 1e-9
        assert chordal_distance(preimages(sg.generators[j], prev)[r], z) <= 1e-9
        prev = z


def test_orbit_requires_positive_length():
    with pytest.raises(ValueError):
        random_backward_orbit(square_sg(), 1, 0, seed=1)


# ---------------------------------------------------------------------------
# empirical measure and chain merging


def test_empirical_measure_no_burn_in():
    orbit = random_backward_orbit(square_sg(), 1, 5, seed=1)
    cloud = empirical_measure(orbit, 0)
    assert len(cloud) == 5
    assert np.allclose(cloud.masses, 0.2)


def test_empirical_measure_single_point_tail():
    orbit = random_backward_orbit(square_sg(), 1, 5, seed=1)
    cloud = empirical_measure(orbit, 4)
    assert len(cloud) == 1
    assert cloud.masses[0] == 1.0


def test_empirical_measure_empty_tail():
    orbit = random_backward_orbit(square_sg(), 1, 5, seed=1)
    with pytest.raises(EmptyTail):
        empirical_measure(orbit, 5)


def test_run_chains_single_chain_degenerate_merge():
    sg = annulus_sg()
    merged = run_chains(sg, 1, 400, 1, burn_in=10, seeds=[17])
    direct = empirical_measure(random_backward_orbit(sg, 1, 400, seed=17), 10)
    assert merged.points == direct.points
    assert np.array_equal(merged.masses, direct.masses)


def test_run_chains_two_equal_chains_mass():
    merged = run_chains(annulus_sg(), 1, 200, 2, burn_in=50, seeds=[1, 2])
    assert len(merged) == 2 * 150
    assert np.allclose(merged.masses, 1.0 / 300)
    assert abs(merged.total_mass - 1.0) <= 1e-9


def test_run_chains_requires_distinct_seeds():
    with pytest.raises(ValueError):
        run_chains(annulus_sg(), 1, 100, 2, seeds=[3, 3])
    with pytest.raises(ValueError):
        run_chains(annulus_sg(), 1, 100, 2, seeds=[3])


def test_merge_order_permutation_bins_identically():
    sg = annulus_sg()
    vp = Viewport(center=0j, width=6.0, height=6.0, nx=32, ny=32)
    g1 = bin_cloud(run_chains(sg, 1, 300, 2, burn_in=20, seeds=[5, 9]), vp)
    g2 = bin_cloud(run_chains(sg, 1, 300, 2, burn_in=20, seeds=[9, 5]), vp)
    assert np.array_equal(g1.cells, g2.cells)
    assert g1.outside_mass == g2.outside_mass


# ---------------------------------------------------------------------------
# statistical surrogates (small-scale; the verification suite runs the full
# versions)


def test_markov_surrogate_cell_frequencies():
    sg = annulus_sg()
    dist = build_index_distribution(sg)
    orbit = random_backward_orbit(sg, 1, 20_000, seed=77)
    pts = np.asarray(orbit.points, dtype=complex)
    syms = np.asarray(orbit.symbols)
    m = np.arange(100, len(pts) - 1)
    in_cell = (
        (pts.real[m] >= 0.75)
        & (pts.real[m] < 1.25)
        & (np.abs(pts.imag[m]) < 0.25)
    )
    hits = m[in_cell]
    assert hits.size > 200
    freq = np.bincount(syms[hits + 1], minlength=4) / hits.size
    assert np.all(np.abs(freq - 0.25) <= 5 * np.sqrt(0.25 / hits.size))
    # the step out of a visited state lands on one of the state's preimages
    for k in hits[:25]:
        j, r = dist.decode[syms[k + 1]]
        target = preimages(sg.generators[j], pts[k])[r]
        assert chordal_distance(target, pts[k + 1]) <= 1e-9


def test_cesaro_average_of_re_vanishes_on_circle():
    orbit = random_backward_orbit(square_sg(), 1, 1_000_000, seed=2024)
    avg = cesaro_average(orbit, lambda z: z.real)
    assert abs(avg) <= 0.01


def test_cloud_validation():
    with pytest.raises(ValueError):
        WeightedPointCloud(points=[1 + 0j], masses=np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        WeightedPointCloud(points=[1 + 0j], masses=np.array([-0.5]))
