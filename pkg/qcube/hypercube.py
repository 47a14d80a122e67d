from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Iterable, Iterator, List, Tuple, Union

import numpy as np

from qcube.constants import BLUE, COLOR_CHARS, COLORING_HEADER, MAX_DIM, MIN_DIM, RED
from qcube.errors import ColoringFormatError, DimensionError

if TYPE_CHECKING:
    from qcube.symmetry import Symmetry


def check_dim(n: int, minimum: int = 1) -> int:
    if not isinstance(n, (int, np.integer)) or n < minimum or n > MAX_DIM:
        raise DimensionError(f"dimension must be in [{minimum}, {MAX_DIM}], got {n!r}")
    return int(n)


def axis_bit(axis: int, n: int) -> int:
    """Bit mask of coordinate `axis` (1-based, coordinate 1 is the most significant bit)."""
    return 1 << (n - axis)


def bit_axis(bit: int, n: int) -> int:
    return n - bit.bit_length() + 1


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, order=True)
class Vertex:
    """
    A vertex of Q_n as a bit-vector.

    Coordinate v_1 is the most significant bit, so the lexicographic order on
    coordinate sequences coincides with the numeric order on `bits`.

    Attributes
    ----------
    bits : int
        The coordinates packed into an integer, 0 <= bits < 2^dim
    dim : int
        The dimension n of the hypercube the vertex lives in
    """

    bits: int
    dim: int

    def __post_init__(self) -> None:
        check_dim(self.dim)
        if not 0 <= self.bits < (1 << self.dim):
            raise DimensionError(f"bits {self.bits} out of range for dim {self.dim}")

    @classmethod
    def from_string(cls, text: str) -> "Vertex":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(int(text, 2), len(text))

    def coordinate(self, axis: int) -> int:
        return (self.bits >> (self.dim - axis)) & 1

    @property
    def weight(self) -> int:
        return popcount(self.bits)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.dim}b")


def antipodal(v: Vertex) -> Vertex:
    """The unique vertex at distance n from `v`."""
    return Vertex(v.bits ^ ((1 << v.dim) - 1), v.dim)


def distance(u: Vertex, v: Vertex) -> int:
    """Hamming distance between two vertices of the same hypercube."""
    if u.dim != v.dim:
        raise DimensionError(f"dimension mismatch: {u.dim} != {v.dim}")
    return popcount(u.bits ^ v.bits)


@dataclass(frozen=True, order=True)
class Edge:
    """
    A canonical undirected edge of Q_n.

    Attributes
    ----------
    lo : Vertex
        The lexicographically smaller endpoint
    hi : Vertex
        The other endpoint
    axis : int
        The coordinate (1-based) in which the endpoints differ
    """

    lo: Vertex
    hi: Vertex
    axis: int

    def __post_init__(self) -> None:
        if self.lo.dim != self.hi.dim:
            raise DimensionError("edge endpoints have different dimensions")
        diff = self.lo.bits ^ self.hi.bits
        if popcount(diff) != 1 or self.lo.bits > self.hi.bits:
            raise ValueError(f"{self.lo}, {self.hi} is not a canonical edge")
        if axis_bit(self.axis, self.lo.dim) != diff:
            raise ValueError(f"axis {self.axis} does not match endpoints {self.lo}, {self.hi}")

    @classmethod
    def between(cls, u: Vertex, v: Vertex) -> "Edge":
        if u.dim != v.dim:
            raise DimensionError(f"dimension mismatch: {u.dim} != {v.dim}")
        lo, hi = (u, v) if u.bits < v.bits else (v, u)
        diff = lo.bits ^ hi.bits
        if popcount(diff) != 1:
            raise ValueError(f"{u} and {v} are not adjacent")
        return cls(lo, hi, bit_axis(diff, lo.dim))

    @property
    def dim(self) -> int:
        return self.lo.dim

    def antipodal(self) -> "Edge":
        return Edge.between(antipodal(self.lo), antipodal(self.hi))

    def __str__(self) -> str:
        return f"{{{self.lo},{self.hi}}}"


class Hypercube:
    """
    Integer lookup tables for Q_n shared by the encoders, the oracle and the simulator.

    Vertices are plain integers here. Edges are numbered by their canonical index,
    which follows the canonical edge ordering: lower endpoint ascending, then axis
    ascending. Every edge therefore appears right after the edges of the
    lexicographically previous vertices, and the first n indices are the edges at 0.

    Attributes
    ----------
    dim : int
        The dimension n
    order : int
        Number of vertices, 2^n
    mask : int
        The all-ones vertex
    num_edges : int
        n * 2^(n-1)
    edge_lo, edge_hi, edge_axis : tuple
        Endpoints and axis of each canonical edge index
    edge_index : dict
        Maps an ordered pair (lo, hi) to the canonical index
    antipodal_edge : tuple
        Canonical index of the antipodal edge of each edge

    Methods
    -------
    index(u, v)
        Canonical index of the edge between two adjacent vertices, in either order
    incident(v)
        Edge indices at `v`, ascending axis
    neighbors(v)
        Neighbors of `v`, ascending axis
    by_distance(u)
        Vertices grouped by their distance from `u`
    """

    def __init__(self, n: int) -> None:
        self.dim = check_dim(n)
        self.order = 1 << n
        self.mask = self.order - 1
        lo, hi, axes = [], [], []
        for v in range(self.order):
            for axis in range(1, n + 1):
                bit = axis_bit(axis, n)
                if not v & bit:
                    lo.append(v)
                    hi.append(v | bit)
                    axes.append(axis)
        self.edge_lo = tuple(lo)
        self.edge_hi = tuple(hi)
        self.edge_axis = tuple(axes)
        self.num_edges = len(lo)
        self.edge_index = {(a, b): i for i, (a, b) in enumerate(zip(lo, hi))}
        self.antipodal_edge = tuple(
            self.edge_index[(b ^ self.mask, a ^ self.mask)] for a, b in zip(lo, hi)
        )
        self._neighbors = tuple(
            tuple(v ^ axis_bit(axis, n) for axis in range(1, n + 1)) for v in range(self.order)
        )
        self._incident = tuple(
            tuple(self.index(v, w) for w in self._neighbors[v]) for v in range(self.order)
        )

    def index(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        try:
            return self.edge_index[(u, v)]
        except KeyError:
            raise ValueError(f"vertices {u} and {v} are not adjacent in Q_{self.dim}") from None

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._neighbors[v]

    def incident(self, v: int) -> Tuple[int, ...]:
        return self._incident[v]

    def antipode(self, v: int) -> int:
        return v ^ self.mask

    def distance(self, u: int, v: int) -> int:
        return popcount(u ^ v)

    def by_distance(self, u: int) -> List[List[int]]:
        layers: List[List[int]] = [[] for _ in range(self.dim + 1)]
        for v in range(self.order):
            layers[popcount(u ^ v)].append(v)
        return layers

    def forward_neighbors(self, u: int, v: int) -> Tuple[int, ...]:
        """Neighbors `w` of `v` with distance(u, w) = distance(u, v) + 1."""
        return tuple(w for w in self._neighbors[v] if not (w ^ v) & (u ^ v))

    def edge(self, i: int) -> Edge:
        n = self.dim
        return Edge(Vertex(self.edge_lo[i], n), Vertex(self.edge_hi[i], n), self.edge_axis[i])

    def edges(self) -> Iterator[Edge]:
        return (self.edge(i) for i in range(self.num_edges))

    def vertex_string(self, v: int) -> str:
        return format(v, f"0{self.dim}b")


@lru_cache(maxsize=None)
def hypercube(n: int) -> Hypercube:
    """Shared, cached lookup tables for Q_n."""
    return Hypercube(n)


@dataclass(frozen=True)
class EdgeOrdering:
    """
    The order in which edges are compared by the lex-leader constraints.

    Attributes
    ----------
    dim : int
        The dimension n
    sequence : tuple of Edge
        All n * 2^(n-1) canonical edges, the edges at 0 first
    """

    dim: int
    sequence: Tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.sequence)

    def __iter__(self) -> Iterator[Edge]:
        return iter(self.sequence)

    def __getitem__(self, i: int) -> Edge:
        return self.sequence[i]


def canonical_edge_ordering(n: int) -> EdgeOrdering:
    """
    Start at 0 and add its incident edges by ascending axis, then move to the
    lexicographically next vertex and add its incident edges that are not in
    the sequence yet.
    """
    cube = hypercube(check_dim(n, MIN_DIM))
    return EdgeOrdering(n, tuple(cube.edges()))


@dataclass(frozen=True)
class Coloring:
    """
    A total red/blue coloring of the edges of Q_n.

    Colors are stored as a bitset over canonical edge indices, bit i set meaning
    edge i is red. Instances are immutable and hashable.

    Attributes
    ----------
    dim : int
        The dimension n
    bits : int
        The color bitset

    Methods
    -------
    color(i)
        Color of the edge with canonical index i
    color_between(u, v)
        Color of the edge between two adjacent integer vertices
    is_antipodal()
        True iff every edge and its antipodal edge have different colors
    pulled_back(symmetry)
        The coloring e -> c(S(e))
    dumps() / loads(text)
        Text serialization, one r/b character per line
    """

    dim: int
    bits: int

    def __post_init__(self) -> None:
        check_dim(self.dim)
        if not 0 <= self.bits < (1 << self.num_edges):
            raise ValueError("color bitset has bits beyond the edge count")

    @property
    def num_edges(self) -> int:
        return self.dim << (self.dim - 1)

    @property
    def cube(self) -> Hypercube:
        return hypercube(self.dim)

    @classmethod
    def all_blue(cls, n: int) -> "Coloring":
        return cls(n, 0)

    @classmethod
    def all_red(cls, n: int) -> "Coloring":
        return cls(n, (1 << (n << (n - 1))) - 1)

    @classmethod
    def from_colors(cls, n: int, colors: Iterable[int]) -> "Coloring":
        bits = 0
        count = 0
        for i, color in enumerate(colors):
            if color not in (BLUE, RED):
                raise ValueError(f"invalid color {color!r} at edge {i}")
            bits |= int(color) << i
            count += 1
        if count != n << (n - 1):
            raise ValueError(f"expected {n << (n - 1)} colors, got {count}")
        return cls(n, bits)

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int, int, int], int]) -> "Coloring":
        """Build a coloring from fn(lo, hi, axis) evaluated on every canonical edge."""
        cube = hypercube(n)
        return cls.from_colors(
            n, (fn(a, b, x) for a, b, x in zip(cube.edge_lo, cube.edge_hi, cube.edge_axis))
        )

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, antipodal: bool = False) -> "Coloring":
        cube = hypercube(n)
        colors = rng.integers(0, 2, size=cube.num_edges)
        if antipodal:
            for i, j in enumerate(cube.antipodal_edge):
                if i < j:
                    colors[j] = 1 - colors[i]
        return cls.from_colors(n, (int(c) for c in colors))

    def color(self, i: int) -> int:
        return (self.bits >> i) & 1

    def color_of(self, e: Edge) -> int:
        return self.color(self.cube.index(e.lo.bits, e.hi.bits))

    def color_between(self, u: int, v: int) -> int:
        return (self.bits >> self.cube.index(u, v)) & 1

    def colors(self) -> List[int]:
        return [(self.bits >> i) & 1 for i in range(self.num_edges)]

    def to_array(self) -> np.ndarray:
        return np.array(self.colors(), dtype=np.uint8)

    def is_antipodal(self) -> bool:
        return all(
            self.color(i) != self.color(j) for i, j in enumerate(self.cube.antipodal_edge)
        )

    def red_degree(self, v: int) -> int:
        return sum(self.color(i) for i in self.cube.incident(v))

    def swapped(self) -> "Coloring":
        """Exchange red and blue."""
        return Coloring(self.dim, self.bits ^ ((1 << self.num_edges) - 1))

    def pulled_back(self, symmetry: "Symmetry") -> "Coloring":
        """The coloring e -> c(S(e))."""
        from qcube.symmetry import edge_permutation

        image = edge_permutation(symmetry, self.dim)
        return Coloring.from_colors(self.dim, (self.color(image[i]) for i in range(self.num_edges)))

    def dumps(self) -> str:
        lines = [COLORING_HEADER.format(dim=self.dim)]
        lines.extend(COLOR_CHARS[c] for c in self.colors())
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Coloring":
        lines = [line.strip() for line in text.splitlines() if line.strip()]
        if not lines:
            raise ColoringFormatError("empty coloring file")
        header = lines[0].split()
        if len(header) != 3 or header[:2] != ["qn-coloring", "v1"] or not header[2].startswith("dim="):
            raise ColoringFormatError(f"bad header: {lines[0]!r}")
        try:
            n = check_dim(int(header[2][4:]))
        except ValueError as exc:
            raise ColoringFormatError(f"bad dimension in header: {lines[0]!r}") from exc
        chars = {"r": RED, "b": BLUE}
        body = lines[1:]
        if len(body) != n << (n - 1):
            raise ColoringFormatError(f"expected {n << (n - 1)} edge lines, found {len(body)}")
        try:
            return cls.from_colors(n, (chars[c] for c in body))
        except KeyError as exc:
            raise ColoringFormatError(f"bad color line {exc.args[0]!r}") from None

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Coloring":
        return cls.loads(Path(path).read_text())


@dataclass(frozen=True)
class SubCube:
    """
    A k-dimensional sub-hypercube of Q_n.

    Local coordinate j (1-based) of Q_k is global coordinate axes[j-1], so local
    vertex bits embed in the order of `axes`.

    Attributes
    ----------
    dim : int
        The ambient dimension n
    base : int
        The vertex of the subcube with zeros on every free axis
    axes : tuple of int
        The free axes, sorted ascending
    """

    dim: int
    base: int
    axes: Tuple[int, ...]

    def __post_init__(self) -> None:
        free = sum(axis_bit(a, self.dim) for a in self.axes)
        if tuple(sorted(set(self.axes))) != self.axes or any(not 1 <= a <= self.dim for a in self.axes):
            raise ValueError(f"invalid axes {self.axes} for dimension {self.dim}")
        if self.base & free:
            raise ValueError("base vertex must be zero on the free axes")

    @classmethod
    def from_endpoints(cls, u: int, v: int, n: int) -> "SubCube":
        """The unique sub-hypercube in which `u` and `v` are antipodal."""
        diff = u ^ v
        axes = tuple(a for a in range(1, n + 1) if diff & axis_bit(a, n))
        return cls(n, u & ~diff, axes)

    @property
    def k(self) -> int:
        return len(self.axes)

    @property
    def free_mask(self) -> int:
        return sum(axis_bit(a, self.dim) for a in self.axes)

    def embed(self, local: int) -> int:
        v = self.base
        k = self.k
        for j, axis in enumerate(self.axes):
            if local & (1 << (k - 1 - j)):
                v |= axis_bit(axis, self.dim)
        return v

    def local(self, v: int) -> int:
        if not self.contains(v):
            raise ValueError(f"vertex {v} is not in the subcube")
        k = self.k
        out = 0
        for j, axis in enumerate(self.axes):
            if v & axis_bit(axis, self.dim):
                out |= 1 << (k - 1 - j)
        return out

    def contains(self, v: int) -> bool:
        return (v & ~self.free_mask) == self.base

    def vertices(self) -> List[int]:
        return [self.embed(x) for x in range(1 << self.k)]

    def restrict(self, c: Coloring) -> Coloring:
        """The coloring of Q_k induced on this subcube."""
        return Coloring.from_function(
            self.k, lambda lo, hi, axis: c.color_between(self.embed(lo), self.embed(hi))
        )


def sub_hypercubes(n: int, k: int) -> Iterator[SubCube]:
    """Every k-dimensional sub-hypercube of Q_n exactly once, 2^(n-k) * C(n, k) in total."""
    check_dim(n)
    if not 1 <= k <= n:
        raise DimensionError(f"subcube dimension must be in [1, {n}], got {k}")
    for axes in combinations(range(1, n + 1), k):
        fixed = [a for a in range(1, n + 1) if a not in axes]
        for values in product((0, 1), repeat=len(fixed)):
            base = sum(axis_bit(a, n) for a, bit in zip(fixed, values) if bit)
            yield SubCube(n, base, axes)
