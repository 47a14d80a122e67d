"""
A small complete DPLL solver.

Two watched literals per clause, chronological backtracking, and a static
decision order (most frequent variable first, false before true). It is meant
for tests and for formulas of a few thousand clauses, not for the hard
instances.
"""
import logging
import time
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from qcube.cnf import CnfFormula, Lit
from qcube.solvers.base import INTERNAL, SolveResult, SolveStatus

logger = logging.getLogger(__name__)


class DpllSolver:
    """
    Parameters
    ----------
    clauses : iterable of sequences of int
    num_vars : int
    conflict_budget : int, optional
        Give up with UNKNOWN after this many conflicts

    Methods
    -------
    solve(assumptions=())
        SAT, UNSAT or UNKNOWN; `model` holds the assignment after SAT
    implied(assumptions=())
        Literals fixed by unit propagation, or None on a conflict
    """

    def __init__(
        self, clauses: Iterable[Sequence[Lit]], num_vars: int, conflict_budget: Optional[int] = None
    ) -> None:
        self.conflict_budget = conflict_budget
        self.clauses: List[List[Lit]] = []
        self.units: List[Lit] = []
        self.has_empty = False
        occurrences: Counter = Counter()
        top = num_vars
        for raw in clauses:
            clause = list(dict.fromkeys(int(l) for l in raw))
            if any(-l in clause for l in clause):
                continue
            top = max([top, *(abs(l) for l in clause)])
            occurrences.update(abs(l) for l in clause)
            if not clause:
                self.has_empty = True
            elif len(clause) == 1:
                self.units.append(clause[0])
            else:
                self.clauses.append(clause)
        self.num_vars = top
        self.value = [0] * (top + 1)
        self.watches: Dict[Lit, List[int]] = {l: [] for v in range(1, top + 1) for l in (v, -v)}
        for ci, clause in enumerate(self.clauses):
            self.watches[clause[0]].append(ci)
            self.watches[clause[1]].append(ci)
        self.order = sorted(range(1, top + 1), key=lambda v: (-occurrences[v], v))
        self.trail: List[Lit] = []
        self.qhead = 0
        self.conflicts = 0
        self.decisions = 0
        self.model: Optional[List[Lit]] = None

    def _lit_value(self, lit: Lit) -> int:
        value = self.value[abs(lit)]
        return value if lit > 0 else -value

    def _assign(self, lit: Lit) -> None:
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)

    def _undo(self, pos: int) -> None:
        for lit in self.trail[pos:]:
            self.value[abs(lit)] = 0
        del self.trail[pos:]
        self.qhead = min(self.qhead, pos)

    def _propagate(self) -> bool:
        while self.qhead < len(self.trail):
            false_lit = -self.trail[self.qhead]
            self.qhead += 1
            watching = self.watches[false_lit]
            kept: List[int] = []
            i = 0
            while i < len(watching):
                ci = watching[i]
                i += 1
                clause = self.clauses[ci]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._lit_value(first) == 1:
                    kept.append(ci)
                    continue
                for k in range(2, len(clause)):
                    if self._lit_value(clause[k]) != -1:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches[clause[1]].append(ci)
                        break
                else:
                    kept.append(ci)
                    if self._lit_value(first) == -1:
                        kept.extend(watching[i:])
                        self.watches[false_lit] = kept
                        return False
                    self._assign(first)
            self.watches[false_lit] = kept
        return True

    def _start(self, assumptions: Sequence[Lit]) -> bool:
        """Reset, then assert units and assumptions; False on an immediate conflict."""
        self._undo(0)
        self.model = None
        if self.has_empty:
            return False
        for lit in [*self.units, *assumptions]:
            if abs(lit) > self.num_vars or lit == 0:
                raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
            value = self._lit_value(lit)
            if value == -1:
                return False
            if value == 0:
                self._assign(lit)
        return self._propagate()

    def _pick(self) -> Optional[int]:
        for v in self.order:
            if not self.value[v]:
                return v
        return None

    def implied(self, assumptions: Sequence[Lit] = ()) -> Optional[Set[Lit]]:
        if not self._start(assumptions):
            return None
        return set(self.trail)

    def solve(self, assumptions: Sequence[Lit] = ()) -> SolveStatus:
        if not self._start(assumptions):
            return SolveStatus.UNSAT
        # (trail position, decision literal, already flipped)
        stack: List[Tuple[int, Lit, bool]] = []
        while True:
            var = self._pick()
            if var is None:
                self.model = [v if self.value[v] > 0 else -v for v in range(1, self.num_vars + 1)]
                return SolveStatus.SAT
            self.decisions += 1
            stack.append((len(self.trail), -var, False))
            self._assign(-var)
            while not self._propagate():
                self.conflicts += 1
                if self.conflict_budget is not None and self.conflicts >= self.conflict_budget:
                    return SolveStatus.UNKNOWN
                while stack and stack[-1][2]:
                    stack.pop()
                if not stack:
                    return SolveStatus.UNSAT
                pos, lit, _ = stack.pop()
                self._undo(pos)
                stack.append((pos, -lit, True))
                self._assign(-lit)


def solve_internal(
    f: CnfFormula, budget: Optional[int] = None, assumptions: Sequence[Lit] = ()
) -> SolveResult:
    start = time.perf_counter()
    solver = DpllSolver(f.clauses, f.num_vars, budget)
    status = solver.solve(assumptions)
    wall = time.perf_counter() - start
    logger.debug("internal solver: %s after %d conflicts in %.3fs", status.value, solver.conflicts, wall)
    return SolveResult(
        status,
        solver.model[: f.num_vars] if solver.model else None,
        wall,
        INTERNAL,
        stats={"conflicts": solver.conflicts, "decisions": solver.decisions},
    )


def propagate(f: CnfFormula, assumptions: Sequence[Lit] = ()) -> Optional[Set[Lit]]:
    """Unit-propagation closure of `f` under `assumptions`, or None on a conflict."""
    return DpllSolver(f.clauses, f.num_vars).implied(assumptions)
