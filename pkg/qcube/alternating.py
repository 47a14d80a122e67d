"""
The alternating coloring c_n and the counting formulas built around it.

In c_n the edge flipping coordinate i at x is red iff the other coordinates of x
have odd parity. Along any path, two consecutive flips in the same direction
(both 0 -> 1 or both 1 -> 0) meet at a color change, which forces at least
|beta(v)| - 1 changes from v to its antipode.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Mapping, Optional, Union

from qcube.constants import BLUE, MIN_DIM, RED
from qcube.hypercube import Coloring, Vertex, axis_bit, check_dim, popcount


def alternating_coloring(n: int) -> Coloring:
    check_dim(n, MIN_DIM)

    def color(lo: int, hi: int, axis: int) -> int:
        others = lo & ~axis_bit(axis, n)
        return RED if popcount(others) % 2 else BLUE

    return Coloring.from_function(n, color)


def beta(v: Union[Vertex, int], n: Optional[int] = None) -> int:
    """2 * popcount(v) - n."""
    if isinstance(v, Vertex):
        return 2 * v.weight - v.dim
    if n is None:
        raise ValueError("an integer vertex needs its dimension")
    return 2 * popcount(v) - n


def g(n: int) -> int:
    """Number of antipodal pairs {v, v̄} of an odd-dimensional c_n with |beta(v)| >= 3."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"g is defined for odd n >= 3, got {n}")
    return sum(comb(n, i) for i in range((n - 3) // 2 + 1))


def h(k: int) -> int:
    """Closed form of g(2k + 1): 4^k - C(2k + 1, k)."""
    return 4 ** k - comb(2 * k + 1, k)


def blocking_count_formula(n: int, even_doubling: bool = False) -> int:
    """
    Blocking pairs of c_n predicted by the counting argument.

    For odd n this is the closed form h((n - 1)/2) of g(n). For even n the
    doubling convention 2 * h(n/2 - 1) applies and must be requested explicitly.
    """
    if n < 3:
        raise ValueError(f"the counting argument needs n >= 3, got {n}")
    if n % 2:
        return h((n - 1) // 2)
    if not even_doubling:
        raise ValueError(f"n = {n} is even; pass even_doubling=True for the 2 * g(n - 1) convention")
    return 2 * h(n // 2 - 1)


def abs_beta_sum(k: int) -> int:
    """Sum over l of |k - 2l| * C(k, l)."""
    return sum(abs(k - 2 * l) * comb(k, l) for l in range(k + 1))


def abs_beta_sum_closed(k: int) -> int:
    """2k * C(k - 1, floor((k - 1)/2)); equals abs_beta_sum(k) for odd k."""
    return 2 * k * comb(k - 1, (k - 1) // 2)


def f_lower_bound(k: int) -> Fraction:
    """L(k) = 2^-k * sum_l |k - 2l| C(k, l) - 1, a lower bound on f(k)."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    return Fraction(abs_beta_sum(k), 1 << k) - 1


def tight_lower_bound(k: int) -> Fraction:
    """2^-k * sum_l max(|k - 2l| - 1, 0) C(k, l): the |beta(v)| - 1 bound applied vertex by vertex."""
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    return Fraction(sum(max(abs(k - 2 * l) - 1, 0) * comb(k, l) for l in range(k + 1)), 1 << k)


def claimed_sqrt_bound(k: int) -> float:
    """sqrt(1/2) * sqrt(k) - (k + 1) / 2^k."""
    return math.sqrt(0.5) * math.sqrt(k) - (k + 1) / 2 ** k


@dataclass(frozen=True)
class LowerBoundRow:
    k: int
    lower: Fraction
    tight: Fraction
    claimed: float
    known_f: Fraction

    @property
    def consistent(self) -> bool:
        return self.claimed <= self.known_f

    def to_record(self) -> Dict[str, object]:
        return {
            "k": self.k,
            "L": str(self.lower),
            "tight": str(self.tight),
            "claimed_sqrt": self.claimed,
            "f": str(self.known_f),
            "claimed_exceeds_f": not self.consistent,
        }


def lower_bound_consistency(known_f: Mapping[int, Fraction]) -> List[LowerBoundRow]:
    """Compare the lower bounds with known values of f; the square-root form may exceed them."""
    return [
        LowerBoundRow(k, f_lower_bound(k), tight_lower_bound(k), claimed_sqrt_bound(k), Fraction(value))
        for k, value in sorted(known_f.items())
    ]
