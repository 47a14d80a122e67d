import io

import pytest

from qcube.cnf import (
    CnfFormula,
    Cube,
    falsified_clause,
    format_key,
    load_dimacs,
    parse_cubes,
    parse_dimacs,
    parse_icnf,
    read_registry,
    save_dimacs,
    write_icnf,
    write_registry,
)
from qcube.errors import DimacsError


@pytest.fixture
def small():
    f = CnfFormula()
    a, b, c = f.var(("r", 0, 1)), f.var(("r", 0, 2)), f.new_var()
    f.add_clause([a, b])
    f.add_clause([-a, c, -a])
    f.add_clause([b, -b])
    return f


def test_registry_is_deterministic(small):
    assert small.var(("r", 0, 1)) == 1
    assert small.lookup(("r", 0, 2)) == 2
    assert small.name_of(3) is None
    with pytest.raises(KeyError):
        small.new_var(("r", 0, 1))


def test_clauses_are_normalized(small):
    assert small.clauses == [[1, 2], [-1, 3]]
    with pytest.raises(ValueError):
        small.add_clause([4])


def test_dimacs_text(small, tmp_path):
    small.add_empty_clause()
    assert small.to_dimacs() == "p cnf 3 3\n1 2 0\n-1 3 0\n0\n"
    path = save_dimacs(small, tmp_path / "f.cnf")
    loaded = load_dimacs(path)
    assert loaded.num_vars == 3 and loaded.clauses == small.clauses
    assert loaded.digest() == small.digest()


def test_parse_dimacs_accepts_comments_and_split_clauses():
    f = parse_dimacs(["c hello", "p cnf 3 2", "1 -2", "0 3", "0", "%", "garbage"])
    assert f.clauses == [[1, -2], [3]]


@pytest.mark.parametrize(
    "lines",
    [
        ["1 2 0"],
        ["p cnf 2"],
        ["p cnf 2 1", "1 3 0"],
        ["p cnf 2 1", "1 x 0"],
        ["p cnf 2 1", "1 2"],
        ["p cnf 2 2", "1 2 0"],
        ["p cnf 2 1", "p cnf 2 1", "1 0"],
        [],
    ],
)
def test_parse_dimacs_errors(lines):
    with pytest.raises(DimacsError):
        parse_dimacs(lines)


def test_cube_validation():
    assert Cube((1, -2)).to_line() == "a 1 -2 0"
    with pytest.raises(ValueError):
        Cube((1, -1))
    with pytest.raises(ValueError):
        Cube((0,))


def test_icnf_round_trip(small):
    sink = io.StringIO()
    write_icnf(small, [Cube((1,)), Cube((-1, 2))], sink)
    text = sink.getvalue()
    assert text.splitlines()[0] == "p inccnf"
    f, cubes = parse_icnf(text.splitlines())
    assert f.clauses == small.clauses
    assert [c.literals for c in cubes] == [(1,), (-1, 2)]
    with pytest.raises(ValueError):
        write_icnf(small, [Cube((9,))], io.StringIO())


def test_parse_cubes_errors():
    assert parse_cubes(["p cnf 1 1", "a 1 0", "1 0"]) == [Cube((1,))]
    with pytest.raises(DimacsError):
        parse_cubes(["a 1 2"])
    with pytest.raises(DimacsError):
        parse_cubes(["a 1 1 0"])


def test_registry_sidecar(small):
    sink = io.StringIO()
    write_registry(small, sink)
    assert sink.getvalue() == "r(0,1) 1\nr(0,2) 2\n"
    assert read_registry(sink.getvalue().splitlines()) == {"r(0,1)": 1, "r(0,2)": 2}
    assert format_key(("p_red", 0, 7, 1)) == "p_red(0,7,1)"


def test_with_units_copies(small):
    g = small.with_units([-1])
    assert g.clauses[-1] == [-1]
    assert small.num_clauses == 2


def test_falsified_clause(small):
    assert falsified_clause(small.clauses, [1, 2, 3]) is None
    assert falsified_clause(small.clauses, [1, -3]) == [-1, 3]
    assert falsified_clause(small.clauses, {1: False, 2: True, 3: False}) is None
