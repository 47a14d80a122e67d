import itertools
import sys
import textwrap
from pathlib import Path
from typing import Iterable, Sequence, Set, Tuple

import numpy as np
import pytest

from qcube.cnf import CnfFormula
from qcube.hypercube import Coloring, axis_bit
from qcube.solvers.base import SolverSpec
from qcube.solvers.internal import solve_internal

ROOT = Path(__file__).resolve().parents[1]


def projected_models(f: CnfFormula, variables: Sequence[int]) -> Set[Tuple[bool, ...]]:
    """Assignments to `variables` that extend to a model of `f` (one solver call each)."""
    out = set()
    for values in itertools.product((False, True), repeat=len(variables)):
        units = [v if on else -v for v, on in zip(variables, values)]
        if solve_internal(f, assumptions=units).is_sat:
            out.add(values)
    return out


def naive_min_changes(c: Coloring, u: int) -> int:
    """Fewest color changes over all n! antipodal geodesics from u."""
    n = c.dim
    best = n
    for order in itertools.permutations(range(1, n + 1)):
        v, colors = u, []
        for axis in order:
            w = v ^ axis_bit(axis, n)
            colors.append(c.color_between(v, w))
            v = w
        best = min(best, sum(a != b for a, b in zip(colors, colors[1:])))
    return best


def pigeonhole(pigeons: int, holes: int) -> CnfFormula:
    f = CnfFormula()
    x = {(p, h): f.var(("x", p, h)) for p in range(pigeons) for h in range(holes)}
    for p in range(pigeons):
        f.add_clause([x[(p, h)] for h in range(holes)])
    for h in range(holes):
        for a, b in itertools.combinations(range(pigeons), 2):
            f.add_clause([-x[(a, h)], -x[(b, h)]])
    return f


def random_cnf(rng: np.random.Generator, num_vars: int, num_clauses: int, width: int = 3) -> CnfFormula:
    f = CnfFormula()
    for _ in range(num_vars):
        f.new_var()
    for _ in range(num_clauses):
        chosen = rng.choice(np.arange(1, num_vars + 1), size=width, replace=False)
        signs = rng.integers(0, 2, size=width)
        f.add_clause([int(v) if s else -int(v) for v, s in zip(chosen, signs)])
    return f


def truth_table_sat(f: CnfFormula) -> bool:
    for values in itertools.product((False, True), repeat=f.num_vars):
        if all(any(values[abs(l) - 1] == (l > 0) for l in clause) for clause in f.clauses):
            return True
    return False


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)


@pytest.fixture
def internal_spec() -> SolverSpec:
    return SolverSpec.preset("internal", conflict_budget=None)


@pytest.fixture
def pysat_spec() -> SolverSpec:
    pytest.importorskip("pysat.solvers")
    return SolverSpec.preset("pysat", pysat_name="minisat22")


@pytest.fixture
def cadical_spec() -> SolverSpec:
    pytest.importorskip("pysat.solvers")
    return SolverSpec.preset("pysat")


FAKE_SOLVER = textwrap.dedent(
    """
    import sys
    import time
    sys.path.insert(0, {root!r})
    from qcube.cnf import load_dimacs
    from qcube.solvers.internal import solve_internal

    mode = {mode!r}
    if mode == "sleep":
        time.sleep(30)
    if mode == "crash":
        sys.exit(3)
    f = load_dimacs(sys.argv[1])
    result = solve_internal(f)
    if result.is_sat:
        model = [-abs(l) for l in result.model] if mode == "liar" else result.model
        print("s SATISFIABLE")
        for i in range(0, len(model), 10):
            print("v " + " ".join(map(str, model[i:i + 10])))
        print("v 0")
        sys.exit(10)
    print("s UNSATISFIABLE")
    sys.exit(20)
    """
)


@pytest.fixture
def fake_solver(tmp_path):
    """SolverSpec factory for a script that answers with the internal solver (modes: honest, liar, crash, sleep)."""

    def make(mode: str = "honest", **overrides) -> SolverSpec:
        script = tmp_path / f"fake_{mode}.py"
        script.write_text(FAKE_SOLVER.format(root=str(ROOT), mode=mode))
        return SolverSpec.from_command(f'"{sys.executable}" "{script}" {{formula}}', name=f"fake-{mode}", **overrides)

    return make


def all_colorings(n: int) -> Iterable[Coloring]:
    m = n << (n - 1)
    return (Coloring(n, bits) for bits in range(1 << m))
