from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import FrozenSet, Iterator, List, Tuple

from qcube.constants import MIN_DIM
from qcube.hypercube import Edge, Vertex, axis_bit, check_dim, hypercube


@dataclass(frozen=True)
class Symmetry:
    """
    An element S_{pi,f} of the hyperoctahedral group acting on Q_n.

    S(v)_i = v_{pi(i)} xor f(i), with pi a permutation of [1, n] and f the set
    of flipped coordinates.

    Attributes
    ----------
    perm : tuple of int
        perm[i-1] = pi(i), 1-based
    flips : frozenset of int
        Coordinates i with f(i) = 1
    """

    perm: Tuple[int, ...]
    flips: FrozenSet[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        n = len(self.perm)
        if sorted(self.perm) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of [1, {n}]: {self.perm}")
        object.__setattr__(self, "flips", frozenset(self.flips))
        if any(not 1 <= i <= n for i in self.flips):
            raise ValueError(f"flip coordinates out of range: {sorted(self.flips)}")

    @classmethod
    def identity(cls, n: int) -> "Symmetry":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int, flips: FrozenSet[int] = frozenset()) -> "Symmetry":
        perm = list(range(1, n + 1))
        perm[a - 1], perm[b - 1] = b, a
        return cls(tuple(perm), flips)

    @property
    def dim(self) -> int:
        return len(self.perm)

    def is_identity(self) -> bool:
        return not self.flips and self.perm == tuple(range(1, self.dim + 1))

    def apply_bits(self, v: int) -> int:
        n = self.dim
        out = 0
        for i, source in enumerate(self.perm, start=1):
            bit = (v >> (n - source)) & 1
            if i in self.flips:
                bit ^= 1
            if bit:
                out |= axis_bit(i, n)
        return out

    def __call__(self, v: Vertex) -> Vertex:
        if v.dim != self.dim:
            raise ValueError(f"symmetry of Q_{self.dim} applied to a vertex of Q_{v.dim}")
        return Vertex(self.apply_bits(v.bits), v.dim)

    def compose(self, other: "Symmetry") -> "Symmetry":
        """The symmetry v -> self(other(v))."""
        perm = tuple(other.perm[p - 1] for p in self.perm)
        flips = frozenset(
            i for i, p in enumerate(self.perm, start=1) if (p in other.flips) != (i in self.flips)
        )
        return Symmetry(perm, flips)

    def inverse(self) -> "Symmetry":
        inv = [0] * self.dim
        for i, p in enumerate(self.perm, start=1):
            inv[p - 1] = i
        return Symmetry(tuple(inv), frozenset(self.perm[i - 1] for i in self.flips))

    def __str__(self) -> str:
        flips = ",".join(str(i) for i in sorted(self.flips)) or "-"
        return f"S(perm={''.join(map(str, self.perm))}, flips={flips})"


@lru_cache(maxsize=4096)
def vertex_permutation(s: Symmetry) -> Tuple[int, ...]:
    return tuple(s.apply_bits(v) for v in range(1 << s.dim))


@lru_cache(maxsize=4096)
def edge_permutation(s: Symmetry, n: int) -> Tuple[int, ...]:
    """Canonical index of S(e) for each canonical edge index e."""
    if s.dim != n:
        raise ValueError(f"symmetry of Q_{s.dim} used on Q_{n}")
    cube = hypercube(n)
    image = vertex_permutation(s)
    return tuple(cube.index(image[a], image[b]) for a, b in zip(cube.edge_lo, cube.edge_hi))


def apply_symmetry(s: Symmetry, e: Edge) -> Edge:
    """The canonical edge {S(lo), S(hi)}."""
    if s.dim != e.dim:
        raise ValueError(f"symmetry of Q_{s.dim} applied to an edge of Q_{e.dim}")
    return Edge.between(s(e.lo), s(e.hi))


def generating_symmetries(n: int, include_flips_only: bool = False) -> List[Symmetry]:
    """
    The symmetries used for symmetry breaking.

    Every S_{pi,f} where pi is a transposition and at most one coordinate is
    flipped, C(n, 2) * (n + 1) in total. With `include_flips_only` the n pure
    single-flip symmetries (identity pi) are appended.
    """
    check_dim(n, MIN_DIM)
    flip_choices = [frozenset()] + [frozenset({i}) for i in range(1, n + 1)]
    out = [
        Symmetry.transposition(n, a, b, flips)
        for a, b in combinations(range(1, n + 1), 2)
        for flips in flip_choices
    ]
    if include_flips_only:
        out.extend(Symmetry(tuple(range(1, n + 1)), flips) for flips in flip_choices[1:])
    return out


def hyperoctahedral_group(n: int) -> Iterator[Symmetry]:
    """All n! * 2^n symmetries of Q_n. Only sensible for small n."""
    for perm in permutations(range(1, n + 1)):
        for mask in product((False, True), repeat=n):
            yield Symmetry(perm, frozenset(i + 1 for i, on in enumerate(mask) if on))
