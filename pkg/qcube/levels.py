"""
Variables shared by the conjecture and bound encodings.

Edge variables r_{u,v} are true when the edge is red. Under the implicit
antipodal scheme only the edge of each antipodal pair with the smaller lower
endpoint owns a variable, and the other edge reads the complemented literal.

Colour-level variables p^x_{u,v,i} are true when some geodesic (or walk) from u
to v whose last edge has colour x uses at most i colour changes. They are only
forced in one direction, so a model may leave them true without a witness.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from qcube.cnf import CnfFormula, Lit
from qcube.constants import BLUE, COLOR_NAMES, RED
from qcube.hypercube import Coloring, Hypercube, hypercube

logger = logging.getLogger(__name__)


def source_vertices(n: int, all_sources: bool = False) -> List[int]:
    """Every vertex, or only the lexicographically smaller vertex of each antipodal pair."""
    order = 1 << n
    return list(range(order)) if all_sources else list(range(order >> 1))


def edge_key(cube: Hypercube, i: int) -> Tuple[str, int, int]:
    return ("r", cube.edge_lo[i], cube.edge_hi[i])


class EdgeVariables:
    """
    The r-literal of every canonical edge.

    Attributes
    ----------
    cube : Hypercube
    implicit : bool
        Whether the implicit antipodal scheme is used
    literals : list of int
        literals[i] is true iff edge i is red
    """

    def __init__(self, f: CnfFormula, cube: Hypercube, implicit: bool) -> None:
        self.cube = cube
        self.implicit = implicit
        self.literals: List[Lit] = [0] * cube.num_edges
        for i in range(cube.num_edges):
            if not implicit or self.owns_variable(i):
                self.literals[i] = f.var(edge_key(cube, i))
        if implicit:
            for i, j in enumerate(cube.antipodal_edge):
                if not self.literals[i]:
                    self.literals[i] = -self.literals[j]

    def owns_variable(self, i: int) -> bool:
        # the antipodal edges of a pair never share a lower endpoint for n >= 2
        return self.cube.antipodal_edge[i] > i

    def between(self, u: int, v: int) -> Lit:
        return self.literals[self.cube.index(u, v)]


def edge_literals(f: CnfFormula, n: int) -> List[Lit]:
    """Recover the r-literal of every edge from the registry of an encoded formula."""
    cube = hypercube(n)
    out: List[Lit] = []
    for i in range(cube.num_edges):
        var = f.lookup(edge_key(cube, i))
        if var is None:
            var = f.lookup(edge_key(cube, cube.antipodal_edge[i]))
            if var is None:
                raise KeyError(f"formula has no variable for edge {i} or its antipodal edge")
            out.append(-var)
        else:
            out.append(var)
    return out


def coloring_units(f: CnfFormula, c: Coloring) -> List[Lit]:
    """Unit literals fixing every edge variable of `f` to the colors of `c`."""
    cube = hypercube(c.dim)
    units = []
    for i in range(cube.num_edges):
        var = f.lookup(edge_key(cube, i))
        if var is not None:
            units.append(var if c.color(i) == RED else -var)
    return units


@dataclass(frozen=True)
class LevelVar:
    """p^x_{u,v,i}: a geodesic from u to v, last edge colored x, at most i changes."""

    u: int
    v: int
    color: int
    level: int

    @property
    def key(self) -> Tuple:
        return (f"p_{COLOR_NAMES[self.color]}", self.u, self.v, self.level)


@dataclass(frozen=True)
class TotalVar:
    """p^t_{u,i}: some antipodal geodesic from u has at most i changes (level -1 in the F-hat variant)."""

    u: int
    level: int

    @property
    def key(self) -> Tuple:
        return ("p_t", self.u, self.level)


class LevelEncoder:
    """
    Emits the colour-level variables and their propagation clauses.

    Parameters
    ----------
    f : CnfFormula
        Target formula, edge variables already allocated
    edges : EdgeVariables
    sources : sequence of int
        Source vertices u
    max_level : int
        Highest level i
    geodesic : bool
        Extend only along distance-increasing edges; otherwise along any edge
        not returning to the source

    Methods
    -------
    build()
        Allocate variables and emit the base, extension, switch and monotonicity clauses
    var(u, v, color, level)
        Variable index of p^x_{u,v,i}
    add_totals(levels, both_colors_shift=False)
        Emit p^t_{u,i} variables over the antipodal targets
    """

    def __init__(
        self,
        f: CnfFormula,
        edges: EdgeVariables,
        sources: Sequence[int],
        max_level: int,
        geodesic: bool = True,
    ) -> None:
        self.f = f
        self.edges = edges
        self.cube = edges.cube
        self.sources = list(sources)
        self.max_level = max_level
        self.geodesic = geodesic
        self._vars: Dict[Tuple[int, int, int, int], int] = {}

    def var(self, u: int, v: int, color: int, level: int) -> int:
        return self._vars[(u, v, color, level)]

    def successors(self, u: int, v: int) -> Iterable[int]:
        if self.geodesic:
            return self.cube.forward_neighbors(u, v)
        return (w for w in self.cube.neighbors(v) if w != u)

    def build(self) -> "LevelEncoder":
        f, cube = self.f, self.cube
        levels = range(self.max_level + 1)
        for u in self.sources:
            for v in range(cube.order):
                if v == u:
                    continue
                for color in (RED, BLUE):
                    for i in levels:
                        self._vars[(u, v, color, i)] = f.new_var(LevelVar(u, v, color, i).key)
        P = self._vars
        for u in self.sources:
            for v in cube.neighbors(u):
                r = self.edges.between(u, v)
                f.add_clause([-r, P[(u, v, RED, 0)]])
                f.add_clause([r, P[(u, v, BLUE, 0)]])
            for v in range(cube.order):
                if v == u:
                    continue
                for w in self.successors(u, v):
                    r = self.edges.between(v, w)
                    for i in levels:
                        f.add_clause([-P[(u, v, RED, i)], -r, P[(u, w, RED, i)]])
                        f.add_clause([-P[(u, v, BLUE, i)], r, P[(u, w, BLUE, i)]])
                        if i > 0:
                            f.add_clause([-P[(u, v, RED, i - 1)], r, P[(u, w, BLUE, i)]])
                            f.add_clause([-P[(u, v, BLUE, i - 1)], -r, P[(u, w, RED, i)]])
                for color in (RED, BLUE):
                    for i in levels[1:]:
                        f.add_clause([-P[(u, v, color, i - 1)], P[(u, v, color, i)]])
        logger.debug(
            "level variables: %d sources, levels 0..%d, %s extension",
            len(self.sources), self.max_level, "geodesic" if self.geodesic else "walk",
        )
        return self

    def add_totals(self, levels: Iterable[int], both_colors_shift: bool = False) -> Dict[Tuple[int, int], int]:
        """
        Emit p^x_{u,ū,i} -> p^t_{u,i} for every listed level.

        With `both_colors_shift` also emit (p^red_{u,ū,i} and p^blue_{u,ū,i}) -> p^t_{u,i-1},
        which requires level i-1 to be listed.
        """
        f, cube = self.f, self.cube
        levels = list(levels)
        totals = {
            (u, i): f.new_var(TotalVar(u, i).key) for u in self.sources for i in levels
        }
        for u in self.sources:
            target = cube.antipode(u)
            for i in levels:
                if 0 <= i <= self.max_level:
                    for color in (RED, BLUE):
                        f.add_clause([-self.var(u, target, color, i), totals[(u, i)]])
                    if both_colors_shift:
                        f.add_clause(
                            [-self.var(u, target, RED, i), -self.var(u, target, BLUE, i), totals[(u, i - 1)]]
                        )
        return totals


def forced_levels(
    f: CnfFormula, encoder: LevelEncoder, c: Coloring
) -> Optional[Dict[Tuple[int, int], int]]:
    """
    Minimum level at which p^x_{u,ū,i} is implied by unit propagation under `c`.

    The level clauses are implications from edge literals, so unit propagation
    derives exactly the variables every model must set. Returns a map
    (u, color) -> level, using max_level + 1 when no level is forced, or None if
    the coloring is inconsistent with the formula.
    """
    from qcube.solvers.internal import propagate

    implied = propagate(f, coloring_units(f, c))
    if implied is None:
        return None
    out = {}
    for u in encoder.sources:
        target = encoder.cube.antipode(u)
        for color in (RED, BLUE):
            level = encoder.max_level + 1
            for i in range(encoder.max_level + 1):
                if encoder.var(u, target, color, i) in implied:
                    level = i
                    break
            out[(u, color)] = level
    return out
