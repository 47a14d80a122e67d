import json
import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Mapping, Optional, Union

from qcube.cardinality import encode_cardinality
from qcube.cnf import CnfFormula, Lit, assignment
from qcube.constants import AT_LEAST, BLUE, KIND_F, KIND_FHAT, KIND_MU, MIN_DIM, RED
from qcube.conjectures import EncodingConfig, finish
from qcube.errors import SolverError, ThresholdError
from qcube.hypercube import Coloring, check_dim, hypercube
from qcube.levels import EdgeVariables, LevelEncoder, edge_key, source_vertices

if TYPE_CHECKING:
    from qcube.solvers.base import SolveResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Threshold:
    """
    A dyadic threshold alpha = numerator / 2^n.

    Attributes
    ----------
    numerator : int
    n : int
        The denominator is 2^n
    """

    numerator: int
    n: int

    @classmethod
    def parse(cls, text: Union[str, Fraction, int, float], n: int) -> "Threshold":
        """Accept "p/q", a decimal string or a number; raise ThresholdError unless alpha * 2^n is an integer."""
        try:
            value = Fraction(text) if not isinstance(text, str) else Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ThresholdError(f"cannot read threshold {text!r}") from exc
        return cls.from_fraction(value, n)

    @classmethod
    def from_fraction(cls, value: Fraction, n: int) -> "Threshold":
        scaled = Fraction(value) * (1 << n)
        if scaled.denominator != 1:
            raise ThresholdError(f"alpha = {value} is not a multiple of 1/2^{n}")
        return cls(int(scaled), n)

    @property
    def denominator(self) -> int:
        return 1 << self.n

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def rhs_all(self) -> int:
        """Right-hand side of a count over every vertex: 2^n * alpha."""
        return self.numerator

    def rhs_half(self) -> int:
        """Right-hand side over one vertex per antipodal pair: ceil(2^(n-1) * alpha)."""
        return -(-self.numerator // 2)

    def __str__(self) -> str:
        return str(self.value)


def _threshold(alpha: Union[Threshold, str, Fraction, int], n: int) -> Threshold:
    if isinstance(alpha, Threshold):
        if alpha.n != n:
            raise ThresholdError(f"threshold has denominator 2^{alpha.n}, expected 2^{n}")
        return alpha
    return Threshold.parse(alpha, n)


def _level_formula(n: int, sources: List[int], max_level: int):
    f = CnfFormula()
    cube = hypercube(n)
    edges = EdgeVariables(f, cube, implicit=False)
    levels = LevelEncoder(f, edges, sources, max_level, geodesic=True).build()
    f.meta.update(n=n, scheme="full", sources=len(sources))
    return f, levels


def _count(f: CnfFormula, lits: List[Lit], k: int, cfg: EncodingConfig) -> None:
    if k > 0:
        encode_cardinality(lits, k, f, AT_LEAST, cfg.cardinality)


def build_f(n: int, alpha: Union[Threshold, str, Fraction], cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """
    Satisfiable iff f(n) >= alpha.

    The minimum number of changes s(u) equals the number of levels 0..n-1 at which
    p^t_{u,i} is not forced. s is symmetric under reversing the geodesic, so by
    default only one vertex per antipodal pair is counted against
    ceil(2^(n-1) * alpha).
    """
    cfg = cfg or EncodingConfig(symmetry_breaking=False, red_degree_constraint=False)
    n = cfg.resolve(n)
    threshold = _threshold(alpha, n)
    sources = source_vertices(n, cfg.all_sources)
    f, levels = _level_formula(n, sources, n - 1)
    totals = levels.add_totals(range(n))
    finish(f, n, cfg)
    k = threshold.rhs_all() if cfg.all_sources else threshold.rhs_half()
    _count(f, [-t for t in totals.values()], k, cfg)
    f.meta.update(kind=KIND_F, alpha=str(threshold.value), rhs=k)
    logger.info("F(%d, %s): %d variables, %d clauses", n, threshold, f.num_vars, f.num_clauses)
    return f


def build_fhat(n: int, alpha: Union[Threshold, str, Fraction], cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """
    Satisfiable iff f-hat(n) >= alpha.

    Every vertex is a source here: the colour of the last edge into the antipode
    is the colour of the first edge seen from the antipode, and the two
    first-colour minima of a vertex are not symmetric. The levels -1..n-1 leave
    min(s, s'-1) + 1 totals unforced per vertex, so the count is compared with
    2^n * alpha + 2^n.
    """
    cfg = cfg or EncodingConfig(symmetry_breaking=False, red_degree_constraint=False)
    n = cfg.resolve(n)
    threshold = _threshold(alpha, n)
    f, levels = _level_formula(n, source_vertices(n, True), n - 1)
    totals = levels.add_totals(range(-1, n), both_colors_shift=True)
    finish(f, n, cfg)
    k = threshold.rhs_all() + (1 << n)
    _count(f, [-t for t in totals.values()], k, cfg)
    f.meta.update(kind=KIND_FHAT, alpha=str(threshold.value), rhs=k)
    logger.info("F^(%d, %s): %d variables, %d clauses", n, threshold, f.num_vars, f.num_clauses)
    return f


def build_mu(n: int, target: int, cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """Satisfiable iff some coloring has at least `target` blocking antipodal pairs."""
    cfg = cfg or EncodingConfig(symmetry_breaking=False, red_degree_constraint=False)
    n = cfg.resolve(n)
    if not 0 <= target <= 1 << (n - 1):
        raise ValueError(f"target must be in [0, {1 << (n - 1)}], got {target}")
    f, levels = _level_formula(n, source_vertices(n, False), 1)
    totals = levels.add_totals([1])
    finish(f, n, cfg)
    _count(f, [-t for t in totals.values()], target, cfg)
    f.meta.update(kind=KIND_MU, target=target, rhs=target)
    logger.info("M(%d, %d): %d variables, %d clauses", n, target, f.num_vars, f.num_clauses)
    return f


def decode_coloring(f: CnfFormula, model: Union[Iterable[Lit], Mapping[int, bool]], n: Optional[int] = None) -> Coloring:
    """
    Read the r variables of a model into a Coloring.

    Edges without their own variable (implicit antipodal scheme) get the
    opposite color of their antipodal edge.

    Raises
    ------
    ValueError
        If the model does not assign some edge variable
    """
    n = check_dim(n if n is not None else int(f.meta["n"]), MIN_DIM)
    cube = hypercube(n)
    values = assignment(model)
    colors = []
    for i in range(cube.num_edges):
        var = f.lookup(edge_key(cube, i))
        flip = False
        if var is None:
            var = f.lookup(edge_key(cube, cube.antipodal_edge[i]))
            flip = True
        if var is None or var not in values:
            raise ValueError(f"incomplete model: edge {cube.edge(i)} is unassigned")
        red = values[var] != flip
        colors.append(RED if red else BLUE)
    return Coloring.from_colors(n, colors)


BUILD = {KIND_F: build_f, KIND_FHAT: build_fhat, KIND_MU: build_mu}


@dataclass
class SearchStep:
    parameter: int
    status: str
    wall_time: float


@dataclass
class BoundResult:
    """
    Outcome of a binary search for f(n), f-hat(n) or mu(n).

    `value` is exact when both the SAT witness and an UNSAT answer one step above
    it were observed (or the search range is exhausted).
    """

    kind: str
    n: int
    value: Union[Fraction, int]
    witness: Optional[Coloring]
    unsat_parameter: Optional[int]
    exact: bool
    steps: List[SearchStep] = field(default_factory=list)

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": "bound",
            "bound": self.kind,
            "n": self.n,
            "value": str(self.value),
            "exact": self.exact,
            "unsat_parameter": self.unsat_parameter,
            "witness": self.witness.dumps() if self.witness else None,
            "steps": [vars(p) for p in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2)


def witness_parameter(kind: str, c: Coloring) -> int:
    """The oracle value of a coloring, scaled the way the binary search counts (numerator or target)."""
    from qcube.oracle import coloring_statistics

    stats = coloring_statistics(c)
    if kind == KIND_MU:
        return stats.mu
    value = stats.f if kind == KIND_F else stats.fhat
    return int(value * (1 << c.dim))


def search_range(kind: str, n: int) -> range:
    if kind == KIND_F:
        return range(0, (n - 1) * (1 << n) + 1)
    if kind == KIND_FHAT:
        return range(-(1 << n), (n - 1) * (1 << n) + 1)
    if kind == KIND_MU:
        return range(0, (1 << (n - 1)) + 1)
    raise ValueError(f"unknown bound kind {kind!r}")


def compute_bound(
    kind: str,
    n: int,
    solve: Callable[[CnfFormula], "SolveResult"],
    cfg: Optional[EncodingConfig] = None,
) -> BoundResult:
    """
    Find the exact value of f(n), f-hat(n) or mu(n) by binary search over SAT calls.

    Parameters run over numerators of alpha * 2^n (or the blocking target for mu).
    Every SAT witness is decoded and evaluated by the oracle, and the search jumps
    to the oracle value, which is never below the threshold it was found at.

    Raises
    ------
    SolverError
        If a witness falls short of its threshold or a solver call ends without a verdict
    """
    from qcube.solvers.base import SolveStatus

    cfg = cfg or EncodingConfig(symmetry_breaking=False, red_degree_constraint=False)
    span = search_range(kind, n)
    result = BoundResult(kind, n, 0, None, None, False)

    def formula_of(param: int) -> CnfFormula:
        if kind == KIND_MU:
            return build_mu(n, param, cfg)
        return BUILD[kind](n, Fraction(param, 1 << n), cfg)

    def reached(param: int) -> Optional[int]:
        start = time.perf_counter()
        f = formula_of(param)
        outcome = solve(f)
        result.steps.append(SearchStep(param, outcome.status.value, time.perf_counter() - start))
        logger.info("%s(%d) at %d: %s", kind, n, param, outcome.status.value)
        if outcome.status is SolveStatus.UNSAT:
            return None
        if outcome.status is not SolveStatus.SAT:
            raise SolverError(f"{kind}({n}) at {param} ended with {outcome.status.value}")
        result.witness = decode_coloring(f, outcome.model, n)
        value = witness_parameter(kind, result.witness)
        if value < param:
            raise SolverError(f"witness for {kind}({n}) at {param} only reaches {value} under the oracle")
        return value

    lo, hi = reached(span.start), span.stop
    if lo is None:
        raise SolverError(f"{kind}({n}) is unsatisfiable at the vacuous threshold {span.start}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        value = reached(mid)
        if value is None:
            hi = result.unsat_parameter = mid
        else:
            lo = value
    result.value = lo if kind == KIND_MU else Fraction(lo, 1 << n)
    result.exact = result.unsat_parameter is not None or hi == span.stop
    return result
