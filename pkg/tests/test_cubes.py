import os
import stat
import sys
import textwrap

import pytest

from qcube.cnf import CnfFormula, Cube
from qcube.errors import SolverError
from qcube.solvers.cubes import (
    builtin_cubes,
    generate_cubes,
    is_cover,
    load_cubes,
    march_cubes,
    save_cubes,
    split_variables,
)


@pytest.fixture
def f():
    out = CnfFormula()
    for _ in range(4):
        out.new_var()
    out.add_clauses([[1, 2], [1, 3], [1, 4], [2, 3], [-4]])
    return out


def test_split_variables_skip_units(f):
    assert split_variables(f, 3) == [1, 2, 3]
    with pytest.raises(ValueError):
        split_variables(f, 4)


def test_builtin_cubes_enumerate_sign_patterns(f):
    cubes = builtin_cubes(f, 2)
    assert [c.literals for c in cubes] == [(-1, -2), (-1, 2), (1, -2), (1, 2)]
    assert is_cover(cubes)
    assert not is_cover(cubes[1:])
    assert builtin_cubes(f, 0) == [Cube(())]


def test_generate_cubes_validation(f):
    with pytest.raises(ValueError):
        generate_cubes(f, -1)
    with pytest.raises(ValueError):
        generate_cubes(f, 1, splitter="random")
    assert len(generate_cubes(f, 3)) == 8


def test_cube_file_round_trip(f, tmp_path):
    cubes = builtin_cubes(f, 3)
    path = save_cubes(cubes, tmp_path / "cubes.icnf")
    assert load_cubes(path) == cubes


def test_cover_limit():
    with pytest.raises(ValueError):
        is_cover([Cube(tuple(range(1, 25)))])


FAKE_CUBER = textwrap.dedent(
    """\
    #!{python}
    import sys
    mode = {mode!r}
    out = sys.argv[sys.argv.index("-o") + 1]
    if mode == "refute":
        sys.exit(20)
    if mode == "cubes":
        with open(out, "w") as sink:
            sink.write("p inccnf\\n1 2 0\\na 1 0\\na -1 0\\n")
    sys.exit(0)
    """
)


@pytest.fixture
def fake_cuber(tmp_path):
    def make(mode):
        path = tmp_path / f"cuber_{mode}"
        path.write_text(FAKE_CUBER.format(python=sys.executable, mode=mode))
        path.chmod(path.stat().st_mode | stat.S_IXUSR)
        return str(path)

    return make


@pytest.mark.skipif(os.name != "posix", reason="needs an executable script")
def test_march_splitter(f, fake_cuber):
    assert [c.literals for c in march_cubes(f, 2, fake_cuber("cubes"))] == [(1,), (-1,)]
    assert march_cubes(f, 2, fake_cuber("refute")) == []
    with pytest.raises(SolverError):
        march_cubes(f, 2, fake_cuber("silent"))


def test_march_tool_from_environment(f, monkeypatch):
    monkeypatch.setenv("QCUBE_MARCH_CU", "/nonexistent/march_cu")
    with pytest.raises(SolverError):
        generate_cubes(f, 2, splitter="march")
