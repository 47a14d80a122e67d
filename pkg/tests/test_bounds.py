from fractions import Fraction

import pytest

from qcube.bounds import (
    Threshold,
    build_f,
    build_fhat,
    build_mu,
    compute_bound,
    decode_coloring,
    search_range,
    witness_parameter,
)
from qcube.cnf import CnfFormula
from qcube.conjectures import EncodingConfig
from qcube.constants import BLUE, KIND_F, KIND_FHAT, KIND_MU, RED
from qcube.errors import SolverError, ThresholdError
from qcube.hypercube import Coloring, hypercube
from qcube.levels import EdgeVariables, LevelEncoder, forced_levels, source_vertices
from qcube.oracle import change_profile, coloring_statistics
from qcube.solvers.base import SolveResult, SolveStatus
from qcube.solvers.external import solve
from qcube.solvers.internal import solve_internal


def internal(f):
    return solve_internal(f)


def test_threshold_parsing():
    t = Threshold.parse("7/8", 3)
    assert (t.numerator, t.rhs_all(), t.rhs_half()) == (7, 7, 4)
    assert Threshold.parse("0.875", 3) == t
    assert Threshold.parse(Fraction(1, 2), 2).numerator == 2
    assert str(t) == "7/8"


@pytest.mark.parametrize("text", ["1/3", "abc", "1/0", "0.1"])
def test_threshold_errors(text):
    with pytest.raises(ThresholdError):
        Threshold.parse(text, 3)


def test_threshold_denominator_must_match():
    with pytest.raises(ThresholdError):
        build_f(3, Threshold(4, 2))


@pytest.mark.parametrize(
    "builder,alpha,sat",
    [(build_f, "1", True), (build_f, "5/4", False), (build_fhat, "1/2", True), (build_fhat, "3/4", False)],
)
def test_square_thresholds(builder, alpha, sat):
    f = builder(2, alpha)
    assert solve_internal(f).is_sat is sat


def test_mu_targets_on_the_square():
    assert solve_internal(build_mu(2, 0)).is_sat
    assert solve_internal(build_mu(2, 1)).is_unsat
    with pytest.raises(ValueError):
        build_mu(2, 3)


@pytest.mark.parametrize(
    "builder,param,sat",
    [(build_f, "1", True), (build_f, "9/8", False), (build_fhat, "1/2", True), (build_fhat, "5/8", False)],
)
def test_cube_thresholds(pysat_spec, builder, param, sat):
    assert solve(builder(3, param), pysat_spec).is_sat is sat


def test_cube_mu(pysat_spec):
    assert solve(build_mu(3, 1), pysat_spec).is_sat
    assert solve(build_mu(3, 2), pysat_spec).is_unsat


def test_witness_reaches_its_threshold():
    f = build_f(2, "1")
    result = solve_internal(f)
    c = decode_coloring(f, result.model)
    assert coloring_statistics(c).f >= 1
    assert witness_parameter(KIND_F, c) == 4


def test_decode_rejects_incomplete_models():
    f = build_f(2, "1")
    with pytest.raises(ValueError):
        decode_coloring(f, [1, -2])


@pytest.mark.parametrize("kind,value", [(KIND_F, Fraction(1)), (KIND_FHAT, Fraction(1, 2)), (KIND_MU, 0)])
def test_compute_bound_on_the_square(kind, value):
    result = compute_bound(kind, 2, internal)
    assert result.value == value
    assert result.exact
    assert witness_parameter(kind, result.witness) == (value if kind == KIND_MU else value * 4)
    record = result.to_record()
    assert record["bound"] == kind and record["value"] == str(value)


def test_mu_search_records_the_unsat_step():
    result = compute_bound(KIND_MU, 2, internal)
    assert result.unsat_parameter == 1
    assert [p.status for p in result.steps] == ["SAT", "UNSAT"]


def test_compute_bound_on_the_cube(pysat_spec):
    result = compute_bound(KIND_F, 3, lambda f: solve(f, pysat_spec))
    assert result.value == 1 and result.exact


def test_solver_call_without_verdict_is_an_error():
    with pytest.raises(SolverError):
        compute_bound(KIND_F, 2, lambda f: SolveResult(SolveStatus.UNKNOWN))


def test_search_ranges():
    assert search_range(KIND_F, 3) == range(0, 17)
    assert search_range(KIND_FHAT, 2) == range(-4, 5)
    assert search_range(KIND_MU, 3) == range(0, 5)
    with pytest.raises(ValueError):
        search_range("nu", 3)


def test_forced_levels_match_the_geodesic_program(rng):
    n = 3
    cube = hypercube(n)
    f = CnfFormula()
    edges = EdgeVariables(f, cube, implicit=False)
    encoder = LevelEncoder(f, edges, source_vertices(n, True), n - 1).build()
    for _ in range(25):
        c = Coloring.random(n, rng)
        forced = forced_levels(f, encoder, c)
        profile = change_profile(c)
        for u in range(cube.order):
            entry = profile.entry(cube.antipode(u))
            assert forced[(u, RED)] == entry.s_red
            assert forced[(u, BLUE)] == entry.s_blue


# keeps one coloring per orbit, used for the refutations
BREAKING = EncodingConfig(symmetry_breaking=True, red_degree_constraint=True)


@pytest.mark.parametrize(
    "builder,n,param,attr",
    [
        (build_f, 4, Fraction(5, 4), "f"),
        (build_fhat, 4, Fraction(1, 2), "fhat"),
        (build_fhat, 5, Fraction(28, 32), "fhat"),
    ],
)
def test_published_thresholds_are_reached(cadical_spec, builder, n, param, attr):
    f = builder(n, param)
    result = solve(f, cadical_spec)
    assert result.is_sat
    assert getattr(coloring_statistics(decode_coloring(f, result.model)), attr) >= param


@pytest.mark.parametrize(
    "builder,n,param",
    [
        (build_f, 4, Fraction(21, 16)),
        (build_fhat, 4, Fraction(9, 16)),
        pytest.param(build_fhat, 5, Fraction(29, 32), marks=pytest.mark.slow),
    ],
)
def test_published_thresholds_are_tight(cadical_spec, builder, n, param):
    assert solve(builder(n, param, BREAKING), cadical_spec).is_unsat


@pytest.mark.parametrize("n,mu", [(4, 2), pytest.param(5, 6, marks=pytest.mark.slow)])
def test_published_blocking_pair_maxima(cadical_spec, n, mu):
    f = build_mu(n, mu)
    result = solve(f, cadical_spec)
    assert result.is_sat
    assert coloring_statistics(decode_coloring(f, result.model)).mu >= mu
    assert solve(build_mu(n, mu + 1, BREAKING), cadical_spec).is_unsat
