from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from qcube.alternating import alternating_coloring
from qcube.geodesics import (
    ChunkPlan,
    GeodesicPath,
    expected_changes_bound,
    optimize_chunks,
    random_antipodal_geodesic,
    run_trial,
    simulate,
)
from qcube.hypercube import Coloring, SubCube
from qcube.oracle import change_profile
from qcube.reports import KNOWN_FHAT


def test_geodesic_validation():
    path = GeodesicPath(3, (0, 4, 6, 7))
    assert path.is_antipodal() and len(path) == 3
    assert path.axes() == (1, 2, 3)
    with pytest.raises(ValueError):
        GeodesicPath(3, (0, 3))
    with pytest.raises(ValueError):
        GeodesicPath(3, (0, 4, 0))


def test_changes_count_internal_vertices():
    c = alternating_coloring(3)
    assert GeodesicPath(3, (0, 4, 6, 7)).changes(c) == 2
    assert GeodesicPath(3, (0, 4)).changes(c) == 0


def test_random_geodesics_are_antipodal(rng):
    for _ in range(20):
        assert random_antipodal_geodesic(6, rng).is_antipodal()


def test_chunk_plan():
    plan = ChunkPlan(10, 3)
    assert (plan.m, plan.remainder) == (3, 1)
    assert plan.bounds() == [(0, 3), (3, 6), (6, 9)]
    assert ChunkPlan(4, 6).m == 0
    with pytest.raises(ValueError):
        ChunkPlan(4, 1)


def test_optimized_chunks_are_optimal_in_their_subcube(rng):
    for _ in range(30):
        c = Coloring.random(6, rng)
        path = random_antipodal_geodesic(6, rng)
        better = optimize_chunks(path, c, 3)
        assert better.is_antipodal()
        assert better.start == path.start
        assert better.vertices[3] == path.vertices[3]
        for lo, hi in ((0, 3), (3, 6)):
            sub = SubCube.from_endpoints(better.vertices[lo], better.vertices[hi], 6)
            local = change_profile(sub.restrict(c)).entry(sub.local(better.vertices[lo])).s
            chunk = GeodesicPath(6, better.vertices[lo:hi + 1])
            assert chunk.changes(c) == local


def test_remainder_is_kept_unless_requested(rng):
    c = Coloring.random(7, rng)
    path = random_antipodal_geodesic(7, rng)
    assert optimize_chunks(path, c, 3).vertices[6:] == path.vertices[6:]
    assert optimize_chunks(path, c, 8).vertices == path.vertices
    assert optimize_chunks(path, c, 3, optimize_remainder=True).is_antipodal()


def test_optimize_needs_an_antipodal_geodesic():
    with pytest.raises(ValueError):
        optimize_chunks(GeodesicPath(3, (0, 4)), alternating_coloring(3), 2)


def test_expected_changes_bound():
    assert expected_changes_bound(9, 3, Fraction(1, 2)) == Fraction(9, 2)
    assert expected_changes_bound(10, 3, Fraction(1, 2)) == Fraction(11, 2)
    assert expected_changes_bound(10, 3, Fraction(1, 2), refined_remainder=Fraction(0)) == Fraction(11, 2)
    for n in range(2, 10_001):
        assert expected_changes_bound(n, 6, Fraction(7, 8)) <= Fraction(5, 16) * n + 6


def test_trials_are_reproducible():
    c = alternating_coloring(8)
    assert run_trial(c, 3, seed=7, trial=4) == run_trial(c, 3, seed=7, trial=4)


def test_simulation_respects_the_bound():
    report = simulate(alternating_coloring(9), 3, trials=200, seed=1, fhat_k=Fraction(1, 2))
    assert report.bound == Fraction(9, 2)
    assert report.passed
    assert report.to_record()["pass"] is True


def test_simulation_does_not_depend_on_workers():
    c = Coloring.random(6, np.random.default_rng(3))
    one = simulate(c, 3, trials=40, seed=5, fhat_k=Fraction(1, 2))
    two = simulate(c, 3, trials=40, seed=5, fhat_k=Fraction(1, 2), workers=2)
    assert one.mean == pytest.approx(two.mean)


def test_simulation_needs_trials():
    with pytest.raises(ValueError):
        simulate(alternating_coloring(4), 2, trials=0, seed=0, fhat_k=Fraction(1, 2))


def test_random_geodesics_are_uniform_on_the_cube(rng):
    draws = 4800
    counts = Counter(random_antipodal_geodesic(3, rng).vertices for _ in range(draws))
    assert len(counts) == 48
    expected = draws / 48
    chi2 = sum((observed - expected) ** 2 / expected for observed in counts.values())
    # 47 degrees of freedom, upper tail below 1e-4
    assert chi2 < 90


@pytest.mark.parametrize("n,k,colorings,trials", [(6, 3, 100, 200), (12, 6, 10, 300)])
def test_simulation_respects_the_bound_on_random_colorings(n, k, colorings, trials):
    fhat_k = KNOWN_FHAT[k]
    for seed in range(colorings):
        c = Coloring.random(n, np.random.default_rng(seed), antipodal=True)
        report = simulate(c, k, trials=trials, seed=seed, fhat_k=fhat_k)
        assert report.passed, (seed, report.mean, report.bound)


def test_long_simulation_on_a_random_coloring():
    c = Coloring.random(6, np.random.default_rng(11), antipodal=True)
    report = simulate(c, 3, trials=10_000, seed=11, fhat_k=KNOWN_FHAT[3])
    assert report.mean <= float(report.bound)
