"""
SAT-free ground truth for colorings of Q_n.

For a source u the geodesic dynamic program walks the vertices in order of
distance from u with state (vertex, colour of the last edge); a step costs one
change when the colour switches. Conditioning on the colour of the first edge
gives s_red and s_blue. A colour that never appears at u cannot start a
geodesic, and its minimum is the sentinel n, one more than any reachable value.
"""
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Optional, Tuple, Union

import networkx as nx
import numpy as np

from qcube.constants import BLUE, COLORS, KIND_F, KIND_FHAT, KIND_MU, MIN_DIM, ORACLE_BATCH, ORACLE_MAX_DIM, RED
from qcube.errors import OracleLimitError
from qcube.hypercube import Coloring, Vertex, check_dim, hypercube

logger = logging.getLogger(__name__)

VertexLike = Union[int, Vertex]


def _bits(u: VertexLike) -> int:
    return u.bits if isinstance(u, Vertex) else int(u)


@dataclass(frozen=True)
class ProfileEntry:
    """
    Minimum color changes from one vertex to its antipode.

    Attributes
    ----------
    s : int
        Over all antipodal geodesics
    s_red, s_blue : int
        Over antipodal geodesics whose first edge is red, resp. blue; n when no
        such geodesic exists
    """

    s: int
    s_red: int
    s_blue: int

    @property
    def s_prime(self) -> int:
        return max(self.s_red, self.s_blue)

    @property
    def fhat_term(self) -> int:
        """min(s, s' - 1); the sentinel makes an unreachable start color give s."""
        return min(self.s, self.s_prime - 1)


@dataclass
class ChangeProfile:
    """
    Per-vertex minima of a coloring as numpy arrays indexed by vertex.

    Methods
    -------
    entry(u)
        The ProfileEntry of one vertex
    f_value()
        Average of s over all vertices
    fhat_value()
        Average of min(s, s' - 1) over all vertices
    blocking_pairs()
        Number of antipodal pairs with s >= 2
    """

    dim: int
    s: np.ndarray
    s_red: np.ndarray
    s_blue: np.ndarray

    def entry(self, u: VertexLike) -> ProfileEntry:
        u = _bits(u)
        return ProfileEntry(int(self.s[u]), int(self.s_red[u]), int(self.s_blue[u]))

    def fhat_terms(self) -> np.ndarray:
        return np.minimum(self.s, np.maximum(self.s_red, self.s_blue) - 1)

    def f_value(self) -> Fraction:
        return Fraction(int(self.s.sum()), 1 << self.dim)

    def fhat_value(self) -> Fraction:
        return Fraction(int(self.fhat_terms().sum()), 1 << self.dim)

    def blocking_pairs(self) -> int:
        half = 1 << (self.dim - 1)
        return int((self.s[:half] >= 2).sum())


def geodesic_change_profile(c: Coloring, u: VertexLike) -> ProfileEntry:
    """Dynamic program for (s, s_red, s_blue) from `u` to its antipode."""
    cube = c.cube
    n = c.dim
    u = _bits(u)
    layers = cube.by_distance(u)
    target = cube.antipode(u)
    best = {}
    for first in COLORS:
        cost: Dict[Tuple[int, int], int] = {}
        for v in layers[1]:
            if c.color_between(u, v) == first:
                cost[(v, first)] = 0
        for d in range(1, n):
            for v in layers[d]:
                for x in COLORS:
                    here = cost.get((v, x))
                    if here is None:
                        continue
                    for w in cube.forward_neighbors(u, v):
                        col = c.color_between(v, w)
                        value = here + (col != x)
                        if value < cost.get((w, col), n + 1):
                            cost[(w, col)] = value
        best[first] = min(n, *(cost.get((target, x), n) for x in COLORS))
    return ProfileEntry(min(best[RED], best[BLUE]), best[RED], best[BLUE])


def change_profile(c: Coloring) -> ChangeProfile:
    s, sr, sb = batch_profiles(c.to_array()[None, :], c.dim)
    return ChangeProfile(c.dim, s[0], sr[0], sb[0])


def batch_profiles(colors: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized geodesic DP over a batch of colorings.

    Parameters
    ----------
    colors : np.ndarray
        Shape (C, m) with entries 0 (blue) or 1 (red), columns in canonical edge order
    n : int

    Returns
    -------
    tuple of np.ndarray
        s, s_red, s_blue, each of shape (C, 2^n)
    """
    cube = hypercube(n)
    colors = np.asarray(colors, dtype=np.int16)
    batch = colors.shape[0]
    inf = np.int16(n + 1)
    out = np.empty((2, batch, cube.order), dtype=np.int16)
    for u in range(cube.order):
        layers = cube.by_distance(u)
        target = cube.antipode(u)
        for first in COLORS:
            cost = np.full((cube.order, 2, batch), inf, dtype=np.int16)
            for v in layers[1]:
                col = colors[:, cube.index(u, v)]
                cost[v, first] = np.where(col == first, 0, inf)
            for d in range(1, n):
                for v in layers[d]:
                    for w in cube.forward_neighbors(u, v):
                        col = colors[:, cube.index(v, w)]
                        arriving = np.minimum(cost[v, 0] + (col != 0), cost[v, 1] + (col != 1))
                        red = col == 1
                        cost[w, 1] = np.where(red, np.minimum(cost[w, 1], arriving), cost[w, 1])
                        cost[w, 0] = np.where(red, cost[w, 0], np.minimum(cost[w, 0], arriving))
            out[first, :, u] = np.minimum(np.minimum(cost[target, 0], cost[target, 1]), n)
    s_red, s_blue = out[RED], out[BLUE]
    return np.minimum(s_red, s_blue), s_red, s_blue


@dataclass(frozen=True)
class ColoringStats:
    f: Fraction
    fhat: Fraction
    mu: int


def coloring_statistics(c: Coloring) -> ColoringStats:
    """The per-coloring quantities maximized by f, f-hat and mu."""
    profile = change_profile(c)
    return ColoringStats(profile.f_value(), profile.fhat_value(), profile.blocking_pairs())


def count_blocking_pairs(c: Coloring) -> int:
    return change_profile(c).blocking_pairs()


def state_graph(c: Coloring) -> nx.DiGraph:
    """Directed graph on (vertex, last color) with weight 1 on color switches."""
    cube = c.cube
    g = nx.DiGraph()
    for v in range(cube.order):
        for w in cube.neighbors(v):
            col = c.color_between(v, w)
            for x in COLORS:
                g.add_edge((v, x), (w, col), weight=int(col != x))
    return g


def _any_path_from(c: Coloring, g: nx.DiGraph, u: int) -> int:
    cube = c.cube
    starts = {(w, c.color_between(u, w)) for w in cube.neighbors(u)}
    lengths = nx.multi_source_dijkstra_path_length(g, starts, weight="weight")
    target = cube.antipode(u)
    return int(min(lengths.get((target, x), c.dim) for x in COLORS))


def min_changes_any_path(c: Coloring, u: VertexLike) -> int:
    """Minimum color changes over all walks (equivalently paths) from `u` to its antipode."""
    return _any_path_from(c, state_graph(c), _bits(u))


def any_path_changes(c: Coloring) -> np.ndarray:
    g = state_graph(c)
    return np.array([_any_path_from(c, g, u) for u in range(1 << c.dim)], dtype=np.int16)


def has_monochromatic_antipodal(c: Coloring, geodesic_only: bool = True) -> bool:
    if geodesic_only:
        return bool((change_profile(c).s == 0).any())
    return bool((any_path_changes(c) == 0).any())


def _batch_values(kind: str, colors: np.ndarray, n: int) -> np.ndarray:
    s, s_red, s_blue = batch_profiles(colors, n)
    if kind == KIND_F:
        return s.sum(axis=1)
    if kind == KIND_FHAT:
        return np.minimum(s, np.maximum(s_red, s_blue) - 1).sum(axis=1)
    if kind == KIND_MU:
        return (s[:, : 1 << (n - 1)] >= 2).sum(axis=1)
    raise ValueError(f"unknown kind {kind!r}")


def _bit_matrix(codes: np.ndarray, m: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(np.int16)


def coloring_codes(n: int, quotient: bool) -> Iterator[np.ndarray]:
    """
    Batches of coloring bitsets to sweep.

    With `quotient` the edges at 0 are fixed to a sorted star (blue edges on the
    low axes, then at most n/2 red ones). Axis permutations sort any star and a
    red/blue swap halves the red count; f, f-hat and mu are invariant under both.
    """
    m = n << (n - 1)
    if not quotient:
        total = 1 << m
        for start in range(0, total, ORACLE_BATCH):
            yield np.arange(start, min(total, start + ORACLE_BATCH), dtype=np.int64)
        return
    free = 1 << (m - n)
    for reds in range(n // 2 + 1):
        star = sum(1 << (n - 1 - j) for j in range(reds))
        for start in range(0, free, ORACLE_BATCH):
            block = np.arange(start, min(free, start + ORACLE_BATCH), dtype=np.int64)
            yield (block << n) | star


@dataclass
class SweepResult:
    kind: str
    n: int
    value: Union[Fraction, int]
    argmax: Coloring
    colorings: int
    runtime: float

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": "oracle",
            "bound": self.kind,
            "n": self.n,
            "value": str(self.value),
            "argmax_coloring": self.argmax.dumps(),
            "colorings": self.colorings,
            "runtime": self.runtime,
        }


def exact_sweep(
    kind: str, n: int, long_run: bool = False, quotient: Optional[bool] = None
) -> SweepResult:
    """
    Maximize f, f-hat or mu exhaustively over colorings of Q_n.

    Raises
    ------
    OracleLimitError
        For n above the default limit unless `long_run` is set
    """
    n = check_dim(n, MIN_DIM)
    if n > ORACLE_MAX_DIM and not long_run:
        raise OracleLimitError(f"exhaustive sweep for n={n} needs the long-run flag")
    if quotient is None:
        quotient = n > ORACLE_MAX_DIM
    m = n << (n - 1)
    start = time.perf_counter()
    best_value, best_code, seen = -(1 << 30), 0, 0
    for codes in coloring_codes(n, quotient):
        values = _batch_values(kind, _bit_matrix(codes, m), n)
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value, best_code = int(values[idx]), int(codes[idx])
        seen += len(codes)
    runtime = time.perf_counter() - start
    value: Union[Fraction, int] = best_value if kind == KIND_MU else Fraction(best_value, 1 << n)
    logger.info("exact %s(%d) = %s over %d colorings in %.1fs", kind, n, value, seen, runtime)
    return SweepResult(kind, n, value, Coloring(n, best_code), seen, runtime)


def exact_f(n: int, long_run: bool = False) -> Fraction:
    return exact_sweep(KIND_F, n, long_run).value


def exact_fhat(n: int, long_run: bool = False) -> Fraction:
    return exact_sweep(KIND_FHAT, n, long_run).value


def exact_mu(n: int, long_run: bool = False) -> int:
    return exact_sweep(KIND_MU, n, long_run).value


def antipodal_colorings(n: int) -> Iterator[Coloring]:
    """All 2^(m/2) antipodal colorings, indexed by the colors of the variable-owning half."""
    cube = hypercube(n)
    owners = [i for i, j in enumerate(cube.antipodal_edge) if j > i]
    for code in range(1 << len(owners)):
        bits = 0
        for k, i in enumerate(owners):
            red = (code >> k) & 1
            bits |= red << i
            bits |= (1 - red) << cube.antipodal_edge[i]
        yield Coloring(n, bits)
