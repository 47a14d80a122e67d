"""
Randomized antipodal geodesics with chunk-wise optimization.

A uniformly random antipodal geodesic is cut into floor(n/k) chunks of length k
and a remainder. Each chunk spans a k-dimensional subcube in which its endpoints
are antipodal; it is replaced by a geodesic of that subcube with the fewest
color changes, preferring one whose first edge continues the color of the
previous chunk. The expected number of changes is then at most
floor(n/k) * (f-hat(k) + 1) + (n mod k).
"""
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from qcube.constants import COLORS
from qcube.hypercube import Coloring, axis_bit, check_dim, popcount

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeodesicPath:
    """
    A geodesic v_0 ... v_L of Q_n.

    Attributes
    ----------
    dim : int
    vertices : tuple of int
    """

    dim: int
    vertices: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        if not self.vertices:
            raise ValueError("a geodesic needs at least one vertex")
        start = self.vertices[0]
        for i, (a, b) in enumerate(zip(self.vertices, self.vertices[1:]), start=1):
            if popcount(a ^ b) != 1:
                raise ValueError(f"vertices {a} and {b} are not adjacent")
            if popcount(start ^ b) != i:
                raise ValueError(f"vertex {b} does not move away from {start}")

    def __len__(self) -> int:
        return len(self.vertices) - 1

    @property
    def start(self) -> int:
        return self.vertices[0]

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def is_antipodal(self) -> bool:
        return len(self) == self.dim and self.end == self.start ^ ((1 << self.dim) - 1)

    def axes(self) -> Tuple[int, ...]:
        n = self.dim
        return tuple(n - (a ^ b).bit_length() + 1 for a, b in zip(self.vertices, self.vertices[1:]))

    def edge_colors(self, c: Coloring) -> List[int]:
        return [c.color_between(a, b) for a, b in zip(self.vertices, self.vertices[1:])]

    def changes(self, c: Coloring) -> int:
        """gamma(P): internal vertices whose two path edges differ in color."""
        colors = self.edge_colors(c)
        return sum(a != b for a, b in zip(colors, colors[1:]))


@dataclass(frozen=True)
class ChunkPlan:
    n: int
    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"chunk length must be at least 2, got {self.k}")

    @property
    def m(self) -> int:
        return self.n // self.k

    @property
    def remainder(self) -> int:
        return self.n % self.k

    def bounds(self) -> List[Tuple[int, int]]:
        """Index ranges (start, end) of the optimized chunks along the path."""
        return [(self.k * i, self.k * (i + 1)) for i in range(self.m)]


def random_antipodal_geodesic(n: int, rng: np.random.Generator) -> GeodesicPath:
    """Uniform start vertex, then a uniform permutation of the axes to flip."""
    check_dim(n)
    v = int(rng.integers(1 << n))
    vertices = [v]
    for axis in rng.permutation(n) + 1:
        v ^= axis_bit(int(axis), n)
        vertices.append(v)
    return GeodesicPath(n, tuple(vertices))


class _ChunkSolver:
    """Cost-to-go table of one chunk: fewest changes from (vertex, last color) to the chunk end."""

    def __init__(self, c: Coloring, end: int) -> None:
        self.c = c
        self.end = end
        self.n = c.dim
        self.memo: Dict[Tuple[int, int], int] = {}

    def moves(self, v: int) -> List[Tuple[int, int]]:
        """(axis, next vertex) pairs towards the end, ascending axis."""
        diff = v ^ self.end
        return [
            (axis, v ^ axis_bit(axis, self.n))
            for axis in range(1, self.n + 1)
            if diff & axis_bit(axis, self.n)
        ]

    def cost(self, v: int, last: int) -> int:
        if v == self.end:
            return 0
        key = (v, last)
        if key not in self.memo:
            self.memo[key] = min(
                (self.c.color_between(v, w) != last) + self.cost(w, self.c.color_between(v, w))
                for _, w in self.moves(v)
            )
        return self.memo[key]

    def start_cost(self, v: int, first: int) -> Optional[int]:
        """Fewest changes inside the chunk when its first edge has color `first`."""
        options = [self.cost(w, first) for _, w in self.moves(v) if self.c.color_between(v, w) == first]
        return min(options) if options else None

    def path(self, v: int, first: int) -> List[int]:
        """Lexicographically least axis sequence among the optimal geodesics starting with `first`."""
        target = self.start_cost(v, first)
        out = [v]
        last = None
        remaining = target
        while v != self.end:
            for _, w in self.moves(v):
                col = self.c.color_between(v, w)
                if last is None:
                    ok = col == first and self.cost(w, col) == remaining
                else:
                    ok = (col != last) + self.cost(w, col) == remaining
                if ok:
                    if last is not None:
                        remaining -= col != last
                    v, last = w, col
                    out.append(w)
                    break
        return out


def optimize_chunks(
    path: GeodesicPath, c: Coloring, k: int, optimize_remainder: bool = False
) -> GeodesicPath:
    """
    Replace every full chunk of an antipodal geodesic by an optimal subcube geodesic.

    Endpoints v_{k*i} are kept. Within a chunk the fewest changes win; a first
    edge matching the previous chunk's last edge is preferred when it costs no
    extra change, and the remaining tie goes to the least axis sequence. The
    remainder chunk is left as is unless `optimize_remainder` is set.
    """
    if not path.is_antipodal():
        raise ValueError("optimize_chunks expects an antipodal geodesic")
    plan = ChunkPlan(path.dim, k)
    spans = plan.bounds()
    if optimize_remainder and plan.remainder:
        spans.append((plan.m * k, path.dim))
    vertices = list(path.vertices[:1])
    previous: Optional[int] = None
    cursor = 0
    for lo, hi in spans:
        start, end = path.vertices[lo], path.vertices[hi]
        solver = _ChunkSolver(c, end)
        costs = {x: solver.start_cost(start, x) for x in COLORS}
        best = min(v for v in costs.values() if v is not None)
        if previous is not None and costs[previous] == best:
            first = previous
        else:
            # ties without a preferred color go to the color of the least optimal axis sequence
            candidates = [x for x in COLORS if costs[x] == best]
            first = min(candidates, key=lambda x: _axis_sequence(solver.path(start, x), c.dim))
        chunk = solver.path(start, first)
        vertices.extend(chunk[1:])
        previous = c.color_between(chunk[-2], chunk[-1])
        cursor = hi
    vertices.extend(path.vertices[cursor + 1:])
    return GeodesicPath(path.dim, tuple(vertices))


def _axis_sequence(vertices: Sequence[int], n: int) -> Tuple[int, ...]:
    return tuple(n - (a ^ b).bit_length() + 1 for a, b in zip(vertices, vertices[1:]))


def expected_changes_bound(
    n: int, k: int, fhat_k: Fraction, refined_remainder: Optional[Fraction] = None
) -> Fraction:
    """
    floor(n/k) * f-hat(k) + floor(n/k) + (n mod k).

    With `refined_remainder` = f-hat(n mod k) the remainder is charged
    f-hat(n mod k) + 1 instead of n mod k.
    """
    plan = ChunkPlan(n, k)
    bound = plan.m * (Fraction(fhat_k) + 1)
    if plan.remainder:
        bound += refined_remainder + 1 if refined_remainder is not None else plan.remainder
    return bound


@dataclass
class SimulationReport:
    n: int
    k: int
    trials: int
    seed: int
    mean: float
    stderr: float
    bound: Fraction
    passed: bool

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": "simulation",
            "n": self.n,
            "k": self.k,
            "trials": self.trials,
            "seed": self.seed,
            "mean": self.mean,
            "stderr": self.stderr,
            "bound": str(self.bound),
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2)


def run_trial(c: Coloring, k: int, seed: int, trial: int, optimize_remainder: bool = False) -> int:
    rng = np.random.default_rng([seed, trial])
    path = random_antipodal_geodesic(c.dim, rng)
    return optimize_chunks(path, c, k, optimize_remainder).changes(c)


def _run_block(args) -> List[int]:
    c, k, seed, trials, optimize_remainder = args
    return [run_trial(c, k, seed, t, optimize_remainder) for t in trials]


def simulate(
    c: Coloring,
    k: int,
    trials: int,
    seed: int,
    fhat_k: Fraction,
    workers: int = 1,
    optimize_remainder: bool = False,
    refined_remainder: Optional[Fraction] = None,
) -> SimulationReport:
    """
    Monte Carlo estimate of the mean number of changes after optimize_chunks.

    Trial t draws its geodesic from a generator seeded with (seed, t), so the
    result does not depend on `workers`. The run passes when the mean is within
    three standard errors above the bound.
    """
    if trials < 1:
        raise ValueError("at least one trial is needed")
    if workers > 1:
        blocks = [range(w, trials, workers) for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, [(c, k, seed, b, optimize_remainder) for b in blocks]))
        values = np.empty(trials)
        for block, part in zip(blocks, parts):
            values[list(block)] = part
    else:
        values = np.array(_run_block((c, k, seed, range(trials), optimize_remainder)), dtype=float)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    bound = expected_changes_bound(c.dim, k, fhat_k, refined_remainder)
    passed = mean <= float(bound) + 3 * stderr
    logger.info(
        "simulate n=%d k=%d trials=%d: mean %.4f (stderr %.4f), bound %s", c.dim, k, trials, mean, stderr, bound
    )
    return SimulationReport(c.dim, k, trials, seed, mean, stderr, bound, passed)
