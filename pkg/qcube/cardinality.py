"""
Cardinality constraints over literal lists.

Two encodings are provided. The sequential counter keeps one register per
(prefix, count) pair and is the default for at-most-k. The modulo totalizer
splits the count into a quotient and a remainder modulo a power of two and is the
default for the at-least-k thresholds of the bound encodings; its output
variables are registered so cube generators can branch on them.
"""
import logging
from dataclasses import dataclass, field
from typing import Hashable, List, Optional, Sequence, Tuple

from qcube.cnf import CnfFormula, Lit
from qcube.constants import AT_LEAST, AT_MOST, MTOT, SEQ

logger = logging.getLogger(__name__)

UP = "up"
DOWN = "down"
BOTH = "both"


@dataclass
class SequentialCounter:
    """
    Registers of a sequential counter.

    registers[i][j] stands for "at least j+1 of lits[0..i] are true". Row i only
    holds min(i+1, upto) registers; the missing ones are constant false.

    Attributes
    ----------
    lits : list of int
        The counted literals
    upto : int
        Number of register columns
    direction : str
        "up" (count forces registers), "down" (registers force count) or "both"
    registers : list of list of int
    """

    lits: List[Lit]
    upto: int
    direction: str
    registers: List[List[int]] = field(default_factory=list)

    def register(self, i: int, j: int) -> Optional[int]:
        row = self.registers[i]
        return row[j] if j < len(row) else None

    @property
    def outputs(self) -> List[Optional[int]]:
        """outputs[j] stands for "at least j+1 of all lits are true", None if constant false."""
        if not self.registers:
            return [None] * self.upto
        last = len(self.registers) - 1
        return [self.register(last, j) for j in range(self.upto)]


def build_sequential_counter(
    lits: Sequence[Lit],
    upto: int,
    f: CnfFormula,
    direction: str = UP,
    tag: Optional[str] = None,
    output_key: Optional[Tuple[Hashable, ...]] = None,
) -> SequentialCounter:
    """
    Build the registers of a sequential counter over `lits`.

    Parameters
    ----------
    lits : sequence of int
        Literals to count
    upto : int
        Registers count up to this value
    f : CnfFormula
        Formula receiving variables and clauses
    direction : str
        Which implications to emit, see SequentialCounter
    tag : str, optional
        Namespace for register names, allocated from `f` when omitted
    output_key : tuple, optional
        When given, the last-row register j is registered as (*output_key, j+1)

    Returns
    -------
    SequentialCounter
    """
    if direction not in (UP, DOWN, BOTH):
        raise ValueError(f"unknown counter direction {direction!r}")
    lits = [int(l) for l in lits]
    counter = SequentialCounter(lits, upto, direction)
    if not lits or upto <= 0:
        return counter
    tag = tag or f.fresh_tag("seq")
    last = len(lits) - 1
    for i in range(len(lits)):
        row = []
        for j in range(min(i + 1, upto)):
            key = (*output_key, j + 1) if output_key is not None and i == last else ("seq", tag, i, j)
            row.append(f.new_var(key))
        counter.registers.append(row)

    up = direction in (UP, BOTH)
    down = direction in (DOWN, BOTH)
    x0 = lits[0]
    r00 = counter.register(0, 0)
    if up:
        f.add_clause([-x0, r00])
    if down:
        f.add_clause([x0, -r00])
    for i in range(1, len(lits)):
        x = lits[i]
        for j in range(len(counter.registers[i])):
            cur = counter.register(i, j)
            same = counter.register(i - 1, j)
            below = counter.register(i - 1, j - 1) if j > 0 else None
            if up:
                if same is not None:
                    f.add_clause([-same, cur])
                if j == 0:
                    f.add_clause([-x, cur])
                else:
                    f.add_clause([-x, -below, cur])
            if down:
                if j == 0:
                    f.add_clause([-cur, same, x])
                else:
                    f.add_clause([-cur, x] + ([same] if same is not None else []))
                    f.add_clause([-cur, below])
    return counter


def encode_at_most_k_seq(
    lits: Sequence[Lit], k: int, f: CnfFormula, tag: Optional[str] = None
) -> SequentialCounter:
    """
    At most `k` of `lits` are true (sequential counter).

    k = 0 becomes unit clauses and k >= len(lits) adds nothing. The returned
    counter exposes its registers so callers can reuse the partial counts.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    lits = [int(l) for l in lits]
    if k == 0:
        for lit in lits:
            f.add_clause([-lit])
        return SequentialCounter(lits, 0, UP)
    if k >= len(lits):
        return SequentialCounter(lits, 0, UP)
    counter = build_sequential_counter(lits[:-1], k, f, UP, tag)
    for i in range(1, len(lits)):
        overflow = counter.register(i - 1, k - 1)
        if overflow is not None:
            f.add_clause([-lits[i], -overflow])
    return counter


@dataclass
class ModuloTotalizer:
    """
    Root outputs of a modulo totalizer.

    The count c is represented as modulus * q + r with 0 <= r < modulus;
    lower[j-1] is true iff r >= j and upper[j-1] is true iff q >= j.
    """

    modulus: int
    lower: List[Lit]
    upper: List[Lit]


def totalizer_modulus(k: int) -> int:
    """Smallest power of two that is at least sqrt(k), and at least 2."""
    p = 2
    while p * p < k:
        p *= 2
    return p


class _ModuloTree:
    def __init__(self, f: CnfFormula, modulus: int, tag: str) -> None:
        self.f = f
        self.p = modulus
        self.tag = tag
        self.nodes = 0

    def _new(self, node: int, part: str, j: int) -> int:
        return self.f.new_var(("mtot", self.tag, node, part, j))

    def unary_sum(self, a: List[Lit], b: List[Lit], node: int, part: str) -> List[Lit]:
        if not a:
            return list(b)
        if not b:
            return list(a)
        f = self.f
        out = [self._new(node, part, t) for t in range(1, len(a) + len(b) + 1)]
        for i in range(len(a) + 1):
            for j in range(len(b) + 1):
                t = i + j
                if t >= 1:
                    f.add_clause(
                        ([-a[i - 1]] if i else []) + ([-b[j - 1]] if j else []) + [out[t - 1]]
                    )
                if t < len(out):
                    f.add_clause(
                        ([a[i]] if i < len(a) else []) + ([b[j]] if j < len(b) else []) + [-out[t]]
                    )
        return out

    def build(self, lits: List[Lit]) -> Tuple[List[Lit], List[Lit]]:
        if len(lits) == 1:
            return [lits[0]], []
        mid = len(lits) // 2
        low_a, up_a = self.build(lits[:mid])
        low_b, up_b = self.build(lits[mid:])
        node = self.nodes
        self.nodes += 1
        return self.merge(node, low_a, up_a, low_b, up_b)

    def merge(
        self, node: int, low_a: List[Lit], up_a: List[Lit], low_b: List[Lit], up_b: List[Lit]
    ) -> Tuple[List[Lit], List[Lit]]:
        f, p = self.f, self.p
        la, lb = len(low_a), len(low_b)
        low = [self._new(node, "l", j) for j in range(1, min(p - 1, la + lb) + 1)]
        carry = self.f.new_var(("mtot", self.tag, node, "c", 1)) if la + lb >= p else None
        for a in range(la + 1):
            for b in range(lb + 1):
                t = a + b
                given = ([-low_a[a - 1]] if a else []) + ([-low_b[b - 1]] if b else [])
                if t >= 1:
                    if t < p:
                        f.add_clause(given + [low[t - 1]] + ([carry] if carry else []))
                    else:
                        f.add_clause(given + [carry])
                        if t - p >= 1:
                            f.add_clause(given + [low[t - p - 1]])
                bounded = ([low_a[a]] if a < la else []) + ([low_b[b]] if b < lb else [])
                if t < p:
                    if carry:
                        f.add_clause(bounded + [-carry])
                    if t + 1 <= len(low):
                        f.add_clause(bounded + [-low[t]])
                elif t - p + 1 <= len(low):
                    f.add_clause(bounded + [-carry, -low[t - p]])
        if carry:
            # after an overflow the remainder is at most la + lb - p
            for j in range(la + lb - p, len(low)):
                f.add_clause([-carry, -low[j]])
        upper = self.unary_sum(up_a, up_b, node, "u")
        if carry:
            upper = self.unary_sum(upper, [carry], node, "q")
        return low, upper


def encode_at_least_k_mtot(
    lits: Sequence[Lit], k: int, f: CnfFormula, tag: Optional[str] = None
) -> Optional[ModuloTotalizer]:
    """
    At least `k` of `lits` are true (modulo totalizer).

    Returns the root outputs, or None when no counting structure was needed
    (k = 0, k = len(lits), or the infeasible k > len(lits) that emits the empty
    clause).
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    lits = [int(l) for l in lits]
    if k == 0:
        return None
    if k > len(lits):
        logger.debug("at-least-%d over %d literals is infeasible", k, len(lits))
        f.add_empty_clause()
        return None
    if k == len(lits):
        for lit in lits:
            f.add_clause([lit])
        return None
    p = totalizer_modulus(k)
    tree = _ModuloTree(f, p, tag or f.fresh_tag("mtot"))
    lower, upper = tree.build(lits)
    q, r = divmod(k, p)
    if q >= 1:
        f.add_clause([upper[q - 1]])
    if r >= 1:
        f.add_clause(([upper[q]] if q < len(upper) else []) + [lower[r - 1]])
    return ModuloTotalizer(p, lower, upper)


def encode_at_least_k_seq(lits: Sequence[Lit], k: int, f: CnfFormula, tag: Optional[str] = None):
    if k > len(lits):
        f.add_empty_clause()
        return None
    return encode_at_most_k_seq([-int(l) for l in lits], len(lits) - k, f, tag)


def encode_at_most_k_mtot(lits: Sequence[Lit], k: int, f: CnfFormula, tag: Optional[str] = None):
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if k >= len(lits):
        return None
    return encode_at_least_k_mtot([-int(l) for l in lits], len(lits) - k, f, tag)


def encode_cardinality(
    lits: Sequence[Lit],
    k: int,
    f: CnfFormula,
    relation: str = AT_MOST,
    method: Optional[str] = None,
    tag: Optional[str] = None,
):
    """
    Dispatch to one of the four encoders.

    `method` defaults to the sequential counter for at-most and the modulo
    totalizer for at-least.
    """
    if relation not in (AT_MOST, AT_LEAST):
        raise ValueError(f"unknown relation {relation!r}")
    method = method or (SEQ if relation == AT_MOST else MTOT)
    if method not in (SEQ, MTOT):
        raise ValueError(f"unknown cardinality method {method!r}")
    encoders = {
        (AT_MOST, SEQ): encode_at_most_k_seq,
        (AT_MOST, MTOT): encode_at_most_k_mtot,
        (AT_LEAST, SEQ): encode_at_least_k_seq,
        (AT_LEAST, MTOT): encode_at_least_k_mtot,
    }
    return encoders[(relation, method)](lits, k, f, tag)
