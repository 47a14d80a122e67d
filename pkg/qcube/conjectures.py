import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from qcube.cardinality import BOTH, build_sequential_counter
from qcube.cnf import CnfFormula
from qcube.constants import (
    CONJ1,
    CONJ2,
    CONJ3,
    CONJ4,
    CONJECTURES,
    DEFAULT_MAX_COMP,
    MIN_DIM,
    MTOT,
    SEQ,
    SIZE_TABLE_MAX_COMP,
)
from qcube.errors import DimensionError
from qcube.hypercube import check_dim, hypercube
from qcube.levels import EdgeVariables, LevelEncoder, edge_literals, source_vertices
from qcube.lexleader import LexLeaderSpec, encode_lex_leader
from qcube.symmetry import Symmetry, edge_permutation, generating_symmetries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncodingConfig:
    """
    Options shared by the conjecture and bound encoders.

    Attributes
    ----------
    n : int, optional
        Dimension; when set, builders check it against their `n` argument
    target : int
        Conjecture number 1-4 (used by build_encoding)
    symmetry_breaking : bool
        Add lex-leader constraints for the generating symmetries
    max_comp : int
        Positions kept per lex-leader constraint after fixpoint removal
    red_degree_constraint : bool
        Require vertex 0 to have the smallest red degree
    all_sources : bool
        Path variables from every vertex instead of the smaller half of each
        antipodal pair (the scale of the published encoding sizes)
    include_flips_only : bool
        Also break the n pure single-flip symmetries
    cardinality : str
        "mtot" or "seq" for the at-least thresholds of the bound encodings
    """

    n: Optional[int] = None
    target: int = CONJ1
    symmetry_breaking: bool = True
    max_comp: int = DEFAULT_MAX_COMP
    red_degree_constraint: bool = True
    all_sources: bool = False
    include_flips_only: bool = False
    cardinality: str = MTOT

    def __post_init__(self) -> None:
        if self.target not in CONJECTURES:
            raise ValueError(f"unknown conjecture {self.target!r}, expected one of {CONJECTURES}")
        if self.max_comp < 0:
            raise ValueError(f"max_comp must be non-negative, got {self.max_comp}")
        if self.cardinality not in (MTOT, SEQ):
            raise ValueError(f"unknown cardinality encoding {self.cardinality!r}")
        if self.n is not None:
            check_dim(self.n, MIN_DIM)

    @property
    def implicit(self) -> bool:
        return self.target in (CONJ1, CONJ2)

    def with_(self, **changes) -> "EncodingConfig":
        return replace(self, **changes)

    def resolve(self, n: int) -> int:
        n = check_dim(n, MIN_DIM)
        if self.n is not None and self.n != n:
            raise DimensionError(f"config is for n={self.n}, builder called with n={n}")
        return n


# the configuration behind reports.PUBLISHED_SIZES
SIZE_TABLE_CONFIG = EncodingConfig(all_sources=True, max_comp=SIZE_TABLE_MAX_COMP)


def inject_symmetry_breaking(
    f: CnfFormula,
    n: int,
    max_comp: int = DEFAULT_MAX_COMP,
    include_flips_only: bool = False,
    symmetries: Optional[Sequence[Symmetry]] = None,
) -> int:
    """
    Add one lex-leader constraint per generating symmetry.

    The sequences compare the r-literals of the canonical edge ordering with the
    r-literals of the images of those edges; in the implicit scheme an image in
    the omitted half reads as the complemented literal of its antipodal edge.

    Returns
    -------
    int
        Number of clauses added
    """
    before = f.num_clauses
    if max_comp == 0:
        return 0
    lits = edge_literals(f, n)
    if symmetries is None:
        symmetries = generating_symmetries(n, include_flips_only)
    for idx, s in enumerate(symmetries):
        image = edge_permutation(s, n)
        spec = LexLeaderSpec(tuple(lits), tuple(lits[j] for j in image), max_comp)
        length = encode_lex_leader(spec, f, tag=f"sb{idx}")
        logger.debug("%s: %d compared positions", s, length)
    added = f.num_clauses - before
    logger.info("symmetry breaking: %d symmetries, %d clauses", len(symmetries), added)
    return added


def inject_red_degree_minimum(f: CnfFormula, n: int) -> int:
    """
    Require red-degree(0) <= red-degree(v) for every vertex v.

    A sequential counter over the n incident r-literals of each vertex provides
    d_{v,i} ("at least i red edges at v") in both directions, and d_{0,i} -> d_{v,i}
    links them. When the formula uses the implicit antipodal scheme the red degree
    of the antipode is n - deg(v), so vertex 0 holds the minimum only if
    deg(0) <= n/2 and the counters stop at floor(n/2) + 1.
    """
    before = f.num_clauses
    cube = hypercube(n)
    lits = edge_literals(f, n)
    antipodal = any(lit < 0 for lit in lits)
    upto = n // 2 + 1 if antipodal else n
    outputs: List[List[Optional[int]]] = []
    for v in range(cube.order):
        incident = [lits[i] for i in cube.incident(v)]
        counter = build_sequential_counter(incident, upto, f, BOTH, tag=f"deg{v}", output_key=("d", v))
        outputs.append(counter.outputs)
    for v in range(1, cube.order):
        for d0, dv in zip(outputs[0], outputs[v]):
            f.add_clause([-d0, dv])
    return f.num_clauses - before


def finish(f: CnfFormula, n: int, cfg: EncodingConfig) -> CnfFormula:
    if cfg.symmetry_breaking:
        inject_symmetry_breaking(f, n, cfg.max_comp, cfg.include_flips_only)
    if cfg.red_degree_constraint:
        inject_red_degree_minimum(f, n)
    return f


def _path_encoding(n: int, cfg: EncodingConfig, geodesic: bool) -> CnfFormula:
    cube = hypercube(n)
    f = CnfFormula()
    edges = EdgeVariables(f, cube, implicit=True)
    sources = source_vertices(n, cfg.all_sources)
    p = {}
    for u in sources:
        for v in range(cube.order):
            if v != u:
                p[(u, v)] = f.var(("p", u, v))
    for u in sources:
        for v in cube.neighbors(u):
            f.add_clause([-edges.between(u, v), p[(u, v)]])
    for u in sources:
        near = set(cube.neighbors(u))
        for v in range(cube.order):
            if v == u:
                continue
            if geodesic:
                step = cube.forward_neighbors(u, v)
            else:
                step = [w for w in cube.neighbors(v) if w != u and w not in near]
            for w in step:
                f.add_clause([-p[(u, v)], -edges.between(v, w), p[(u, w)]])
    for u in sources:
        f.add_clause([-p[(u, cube.antipode(u))]])
    f.meta.update(n=n, scheme="implicit", sources=len(sources), geodesic=geodesic)
    return f


def build_phi(n: int, cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """
    Antipodal colorings without a monochromatic antipodal path.

    Unsatisfiable iff every antipodal coloring of Q_n has a monochromatic
    antipodal path. Path variables are only forced upward, so a model must be
    re-checked before it is taken as a counterexample.
    """
    cfg = cfg or EncodingConfig(target=CONJ1)
    n = cfg.resolve(n)
    f = finish(_path_encoding(n, cfg, geodesic=False), n, cfg)
    f.meta["target"] = CONJ1
    logger.info("Phi_%d: %d variables, %d clauses", n, f.num_vars, f.num_clauses)
    return f


def build_psi(n: int, cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """Like build_phi with paths restricted to geodesics."""
    cfg = cfg or EncodingConfig(target=CONJ2)
    n = cfg.resolve(n)
    f = finish(_path_encoding(n, cfg, geodesic=True), n, cfg)
    f.meta["target"] = CONJ2
    logger.info("Psi_%d: %d variables, %d clauses", n, f.num_vars, f.num_clauses)
    return f


def _one_change_encoding(n: int, cfg: EncodingConfig, geodesic: bool) -> CnfFormula:
    cube = hypercube(n)
    f = CnfFormula()
    edges = EdgeVariables(f, cube, implicit=False)
    levels = LevelEncoder(f, edges, source_vertices(n, cfg.all_sources), 1, geodesic).build()
    for u in levels.sources:
        for color in (0, 1):
            f.add_clause([-levels.var(u, cube.antipode(u), color, 1)])
    f.meta.update(n=n, scheme="full", sources=len(levels.sources), geodesic=geodesic)
    return finish(f, n, cfg)


def build_conj3(n: int, cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """Colorings in which every antipodal path needs at least two color changes."""
    cfg = cfg or EncodingConfig(target=CONJ3)
    n = cfg.resolve(n)
    f = _one_change_encoding(n, cfg, geodesic=False)
    f.meta["target"] = CONJ3
    logger.info("Conj3_%d: %d variables, %d clauses", n, f.num_vars, f.num_clauses)
    return f


def build_conj4(n: int, cfg: Optional[EncodingConfig] = None) -> CnfFormula:
    """Colorings in which every antipodal geodesic needs at least two color changes."""
    cfg = cfg or EncodingConfig(target=CONJ4)
    n = cfg.resolve(n)
    f = _one_change_encoding(n, cfg, geodesic=True)
    f.meta["target"] = CONJ4
    logger.info("Conj4_%d: %d variables, %d clauses", n, f.num_vars, f.num_clauses)
    return f


BUILDERS = {CONJ1: build_phi, CONJ2: build_psi, CONJ3: build_conj3, CONJ4: build_conj4}


def build_encoding(n: int, cfg: EncodingConfig) -> CnfFormula:
    return BUILDERS[cfg.target](n, cfg)
