import pytest
from conftest import all_colorings

from qcube.cnf import CnfFormula
from qcube.conjectures import (
    SIZE_TABLE_CONFIG,
    EncodingConfig,
    build_conj3,
    build_conj4,
    build_encoding,
    build_phi,
    build_psi,
    inject_red_degree_minimum,
    inject_symmetry_breaking,
)
from qcube.constants import CONJ1, CONJ2, CONJ3, CONJ4
from qcube.errors import DimensionError
from qcube.hypercube import hypercube
from qcube.levels import EdgeVariables, coloring_units, edge_literals
from qcube.oracle import antipodal_colorings, has_monochromatic_antipodal
from qcube.reports import PUBLISHED_SIZES
from qcube.solvers.external import solve
from qcube.solvers.internal import propagate, solve_internal
from qcube.symmetry import hyperoctahedral_group

PLAIN = EncodingConfig(symmetry_breaking=False, red_degree_constraint=False)


@pytest.mark.parametrize(
    "builder,n,variables,clauses",
    [
        (build_phi, 2, 8, 10),
        (build_phi, 3, 34, 64),
        (build_psi, 3, 34, 52),
        (build_phi, 4, 136, 392),
        (build_psi, 4, 136, 264),
    ],
)
def test_path_encoding_sizes(builder, n, variables, clauses):
    f = builder(n, PLAIN)
    assert (f.num_vars, f.num_clauses) == (variables, clauses)


def test_table_configuration_sizes_on_q4():
    phi, psi = build_phi(4, SIZE_TABLE_CONFIG), build_psi(4, SIZE_TABLE_CONFIG)
    assert (phi.num_vars, phi.num_clauses) == (760, 2403)
    assert (psi.num_vars, psi.num_clauses) == (760, 2147)


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_encoding_sizes_are_within_five_percent_of_the_published_table(n):
    phi, psi = build_phi(n, SIZE_TABLE_CONFIG), build_psi(n, SIZE_TABLE_CONFIG)
    measured = (phi.num_vars, psi.num_vars, phi.num_clauses, psi.num_clauses)
    for value, reference in zip(measured, PUBLISHED_SIZES[n]):
        assert abs(value - reference) <= 0.05 * reference, (n, measured)


@pytest.mark.parametrize("max_comp", [1, 5, 13, 24])
def test_lex_leader_size_grows_linearly_with_max_comp(max_comp):
    # every generating symmetry of Q_4 moves at least 24 edges
    f = _breaking_formula(4, implicit=True)
    assert inject_symmetry_breaking(f, 4, max_comp) == 30 * (3 * max_comp - 2)
    assert f.num_vars == 16 + 30 * (max_comp - 1)


def test_all_sources_doubles_the_path_variables():
    f = build_psi(3, PLAIN.with_(all_sources=True))
    assert f.num_vars == 6 + 8 * 7
    assert f.meta["sources"] == 8


def test_encoding_is_deterministic():
    assert build_phi(3).to_dimacs() == build_phi(3).to_dimacs()
    assert build_conj4(3).digest() == build_encoding(3, EncodingConfig(target=CONJ4)).digest()


def test_implicit_scheme_shares_variables_between_antipodal_edges():
    f = build_phi(3, PLAIN)
    cube = hypercube(3)
    lits = edge_literals(f, 3)
    assert all(lits[i] == -lits[j] for i, j in enumerate(cube.antipodal_edge))
    assert sorted(abs(l) for l in lits[:3]) == [1, 2, 3]


@pytest.mark.parametrize("builder", [build_phi, build_psi])
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("cfg", [PLAIN, EncodingConfig()])
def test_small_conjecture_encodings_are_unsat(builder, n, cfg):
    assert solve_internal(builder(n, cfg)).is_unsat


@pytest.mark.parametrize("builder", [build_conj3, build_conj4])
def test_one_change_encodings_on_the_square_are_unsat(builder):
    assert solve_internal(builder(2, PLAIN)).is_unsat


def test_conj4_on_the_cube_is_unsat(pysat_spec):
    assert solve(build_conj4(3), pysat_spec).is_unsat


def test_geodesic_encoding_forces_a_contradiction_exactly_for_monochromatic_geodesics():
    f = build_psi(3, PLAIN)
    for c in antipodal_colorings(3):
        refuted = propagate(f, coloring_units(f, c)) is None
        assert refuted == has_monochromatic_antipodal(c, geodesic_only=True)


def test_path_encoding_is_unsat_exactly_for_monochromatic_paths():
    f = build_phi(3, PLAIN)
    for c in antipodal_colorings(3):
        refuted = solve_internal(f, assumptions=coloring_units(f, c)).is_unsat
        assert refuted == has_monochromatic_antipodal(c, geodesic_only=False)


@pytest.mark.parametrize("n", [3, 4, pytest.param(5, marks=pytest.mark.slow)])
def test_geodesic_unsat_carries_down_to_the_one_change_encoding(pysat_spec, n):
    assert solve(build_psi(n), pysat_spec).is_unsat
    assert solve(build_conj4(n - 1), pysat_spec).is_unsat


def _breaking_formula(n: int, implicit: bool) -> CnfFormula:
    f = CnfFormula()
    EdgeVariables(f, hypercube(n), implicit=implicit)
    return f


def test_symmetry_breaking_keeps_the_lex_least_coloring_of_every_orbit():
    f = _breaking_formula(3, implicit=True)
    inject_symmetry_breaking(f, 3)
    inject_red_degree_minimum(f, 3)
    group = list(hyperoctahedral_group(3))
    kept = 0
    for c in antipodal_colorings(3):
        representative = min((c.pulled_back(s) for s in group), key=lambda d: tuple(d.colors()))
        assert solve_internal(f, assumptions=coloring_units(f, representative)).is_sat
        kept += solve_internal(f, assumptions=coloring_units(f, c)).is_sat
    assert 0 < kept < 64


def test_red_degree_constraint_matches_the_minimum_degree():
    f = _breaking_formula(2, implicit=False)
    inject_red_degree_minimum(f, 2)
    for c in all_colorings(2):
        expected = all(c.red_degree(0) <= c.red_degree(v) for v in range(4))
        assert solve_internal(f, assumptions=coloring_units(f, c)).is_sat == expected


@pytest.mark.parametrize("n", [2, 3])
def test_capped_red_degree_counters_on_antipodal_colorings(n):
    f = _breaking_formula(n, implicit=True)
    inject_red_degree_minimum(f, n)
    assert f.lookup(("d", 0, n // 2 + 1)) is not None
    for c in antipodal_colorings(n):
        expected = all(c.red_degree(0) <= c.red_degree(v) for v in range(1 << n))
        assert solve_internal(f, assumptions=coloring_units(f, c)).is_sat == expected


def test_symmetry_breaking_keeps_every_orbit_closed_restriction_satisfiable():
    group = list(hyperoctahedral_group(3))
    colorings = list(antipodal_colorings(3))
    seen = set()
    for c in colorings:
        if c.bits in seen:
            continue
        orbit = {c.pulled_back(s).bits for s in group}
        seen |= orbit
        f = _breaking_formula(3, implicit=True)
        for d in colorings:
            if d.bits not in orbit:
                f.add_clause([-lit for lit in coloring_units(f, d)])
        inject_symmetry_breaking(f, 3)
        inject_red_degree_minimum(f, 3)
        assert solve_internal(f).is_sat, sorted(orbit)
    assert len(seen) == len(colorings)


def test_max_comp_zero_disables_symmetry_breaking():
    f = _breaking_formula(3, implicit=True)
    assert inject_symmetry_breaking(f, 3, max_comp=0) == 0
    assert f.num_clauses == 0


def test_include_flips_only_adds_clauses():
    plain, flips = _breaking_formula(3, True), _breaking_formula(3, True)
    inject_symmetry_breaking(plain, 3)
    inject_symmetry_breaking(flips, 3, include_flips_only=True)
    assert flips.num_clauses > plain.num_clauses


def test_config_validation():
    with pytest.raises(ValueError):
        EncodingConfig(target=5)
    with pytest.raises(ValueError):
        EncodingConfig(cardinality="bdd")
    with pytest.raises(ValueError):
        EncodingConfig(max_comp=-1)
    with pytest.raises(DimensionError):
        build_phi(3, EncodingConfig(n=4))
    with pytest.raises(DimensionError):
        build_psi(1)
    assert EncodingConfig(target=CONJ2).implicit and not EncodingConfig(target=CONJ3).implicit


def test_targets_are_recorded():
    for target in (CONJ1, CONJ2, CONJ3, CONJ4):
        assert build_encoding(2, PLAIN.with_(target=target)).meta["target"] == target
