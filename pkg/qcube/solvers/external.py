import logging
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from qcube.cnf import CnfFormula, Lit, load_dimacs, save_dimacs
from qcube.constants import SIMPLIFY_CONFLICTS
from qcube.errors import SolverError
from qcube.solvers.base import (
    INTERNAL,
    PYSAT,
    SUBPROCESS,
    SolveResult,
    SolveStatus,
    SolverSpec,
    check_model,
    complete_model,
)
from qcube.solvers.internal import solve_internal

logger = logging.getLogger(__name__)


def parse_model(lines: Iterable[str]) -> List[Lit]:
    """
    Collect the literals of the `v` lines of a solver's output.

    Raises
    ------
    SolverError
        If there is no `v` line or a token is not an integer
    """
    lits: List[Lit] = []
    seen = False
    for line in lines:
        tokens = line.split()
        if not tokens or tokens[0] != "v":
            continue
        seen = True
        for token in tokens[1:]:
            try:
                lit = int(token)
            except ValueError:
                raise SolverError(f"unparsable model token {token!r}") from None
            if lit:
                lits.append(lit)
    if not seen:
        raise SolverError("solver reported SAT without a model")
    return lits


def _status_line(lines: Sequence[str]) -> Optional[str]:
    for line in lines:
        if line.startswith("s "):
            return line[2:].strip()
    return None


def solve_external(f: CnfFormula, spec: SolverSpec) -> SolveResult:
    """
    Run a solver binary on a temporary DIMACS copy of `f`.

    The exit code decides the verdict; a SAT model is read from the `v` lines,
    completed with false for unmentioned variables and checked against every clause.

    Raises
    ------
    SolverError
        Missing executable, unknown exit code or unparsable model
    ModelCheckError
        The model falsifies a clause
    """
    with tempfile.TemporaryDirectory(prefix="qcube-") as tmp:
        path = save_dimacs(f, Path(tmp) / "formula.cnf")
        argv = spec.argv(path)
        logger.debug("running %s", " ".join(argv))
        start = time.perf_counter()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=spec.timeout)
        except subprocess.TimeoutExpired:
            wall = time.perf_counter() - start
            logger.info("%s: timeout after %.1fs", spec.name or argv[0], wall)
            return SolveResult(SolveStatus.TIMEOUT, None, wall, SUBPROCESS)
        except FileNotFoundError:
            raise SolverError(f"solver executable {argv[0]!r} not found") from None
    wall = time.perf_counter() - start
    lines = proc.stdout.splitlines()
    code = proc.returncode
    if code == spec.unsat_exit_code:
        result = SolveResult(SolveStatus.UNSAT, None, wall, SUBPROCESS, code)
    elif code == spec.sat_exit_code:
        if _status_line(lines) == "UNSATISFIABLE":
            raise SolverError("exit code says SAT but the status line says UNSATISFIABLE")
        model = complete_model(parse_model(lines), f.num_vars)
        check_model(f, model)
        result = SolveResult(SolveStatus.SAT, model, wall, SUBPROCESS, code)
    else:
        tail = proc.stderr.strip().splitlines()[-1:] or [""]
        raise SolverError(f"{argv[0]} exited with unknown code {code}: {tail[0]}")
    logger.info("%s: %s in %.2fs", spec.name or argv[0], result.status.value, wall)
    return result


def solve_pysat(f: CnfFormula, spec: SolverSpec, assumptions: Sequence[Lit] = ()) -> SolveResult:
    """In-process solve through python-sat."""
    from pysat.solvers import Solver

    start = time.perf_counter()
    if any(not clause for clause in f.clauses):
        return SolveResult(SolveStatus.UNSAT, None, 0.0, PYSAT)
    with Solver(name=spec.pysat_name, bootstrap_with=f.clauses) as solver:
        sat = solver.solve(assumptions=list(assumptions))
        model = solver.get_model() if sat else None
    wall = time.perf_counter() - start
    if not sat:
        return SolveResult(SolveStatus.UNSAT, None, wall, PYSAT)
    model = complete_model(model, f.num_vars)
    return SolveResult(SolveStatus.SAT, model, wall, PYSAT)


def solve(f: CnfFormula, spec: SolverSpec, assumptions: Sequence[Lit] = ()) -> SolveResult:
    """
    Solve `f` under `assumptions` with the backend named by `spec`.

    The subprocess backend receives the assumptions as unit clauses. Every SAT
    model is checked against the clauses and the assumptions.
    """
    if spec.backend == INTERNAL:
        result = solve_internal(f, spec.conflict_budget, assumptions)
    elif spec.backend == PYSAT:
        result = solve_pysat(f, spec, assumptions)
    else:
        result = solve_external(f.with_units(assumptions) if assumptions else f, spec)
    if result.is_sat:
        check_model(f, result.model, [[lit] for lit in assumptions])
    return result


@dataclass
class SimplifyResult:
    """A simplified formula, or the verdict when simplification already decided it."""

    status: SolveStatus
    formula: Optional[CnfFormula]
    wall_time: float


def simplify_external(
    f: CnfFormula, spec: SolverSpec, conflicts: int = SIMPLIFY_CONFLICTS
) -> SimplifyResult:
    """
    Let the solver simplify `f` for a bounded number of conflicts and read back the result.

    Variable numbers of the simplified formula are the solver's own, so it keeps
    no registry and its models cannot be decoded into colorings.
    """
    if spec.backend != SUBPROCESS:
        raise SolverError("simplification needs a subprocess solver")
    with tempfile.TemporaryDirectory(prefix="qcube-") as tmp:
        source = save_dimacs(f, Path(tmp) / "formula.cnf")
        target = Path(tmp) / "simplified.cnf"
        binary = spec.argv(source)[0]
        argv = [binary, "-q", "-n", f"--conflicts={conflicts}", "-o", str(target), str(source)]
        logger.debug("running %s", " ".join(argv))
        start = time.perf_counter()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=spec.timeout)
        except subprocess.TimeoutExpired:
            return SimplifyResult(SolveStatus.TIMEOUT, None, time.perf_counter() - start)
        except FileNotFoundError:
            raise SolverError(f"solver executable {binary!r} not found") from None
        wall = time.perf_counter() - start
        if proc.returncode == spec.unsat_exit_code:
            return SimplifyResult(SolveStatus.UNSAT, None, wall)
        if proc.returncode == spec.sat_exit_code:
            return SimplifyResult(SolveStatus.SAT, None, wall)
        if not target.exists():
            raise SolverError(f"{binary} wrote no simplified formula (exit code {proc.returncode})")
        simplified = load_dimacs(target)
    simplified.meta.update(f.meta, simplified=True, parent_digest=f.digest())
    logger.info(
        "simplified %d/%d to %d/%d vars/clauses in %.1fs",
        f.num_vars, f.num_clauses, simplified.num_vars, simplified.num_clauses, wall,
    )
    return SimplifyResult(SolveStatus.UNKNOWN, simplified, wall)
