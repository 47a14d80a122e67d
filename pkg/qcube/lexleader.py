import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from qcube.cnf import CnfFormula, Lit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LexLeaderSpec:
    """
    A requirement left <=_lex right over two literal sequences.

    Attributes
    ----------
    left, right : tuple of int
        Literal sequences of equal length, most significant position first
    max_comp : int or None
        Keep at most this many positions after fixpoint removal, None keeps all
    """

    left: Tuple[Lit, ...]
    right: Tuple[Lit, ...]
    max_comp: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if len(self.left) != len(self.right):
            raise ValueError(
                f"lex-leader sequences differ in length: {len(self.left)} != {len(self.right)}"
            )
        if self.max_comp is not None and self.max_comp < 0:
            raise ValueError(f"max_comp must be non-negative, got {self.max_comp}")

    def reduced(self) -> "LexLeaderSpec":
        """Drop positions comparing a literal with itself, then truncate to max_comp."""
        pairs = [(x, y) for x, y in zip(self.left, self.right) if x != y]
        if self.max_comp is not None:
            pairs = pairs[: self.max_comp]
        return LexLeaderSpec(tuple(x for x, _ in pairs), tuple(y for _, y in pairs), None)

    def __len__(self) -> int:
        return len(self.left)


def encode_lex_leader(spec: LexLeaderSpec, f: CnfFormula, tag: Optional[str] = None) -> int:
    """
    Emit clauses enforcing left <=_lex right in every model.

    One auxiliary a_k per position except the last carries "the first k
    positions are equal so far, with x_j <= y_j". For L positions this emits
    3L - 2 clauses and L - 1 auxiliaries.

    Returns
    -------
    int
        Number of compared positions after reduction
    """
    spec = spec.reduced()
    xs, ys = spec.left, spec.right
    length = len(xs)
    if length == 0:
        return 0
    if length == 1:
        f.add_clause([-xs[0], ys[0]])
        return 1
    tag = tag or f.fresh_tag("lex")
    eq = [f.new_var(("lex", tag, k)) for k in range(length - 1)]
    f.add_clause([-xs[0], ys[0]])
    f.add_clause([-xs[0], eq[0]])
    f.add_clause([ys[0], eq[0]])
    for k in range(1, length - 1):
        f.add_clause([-eq[k - 1], -xs[k], ys[k]])
        f.add_clause([-eq[k - 1], -xs[k], eq[k]])
        f.add_clause([-eq[k - 1], ys[k], eq[k]])
    f.add_clause([-eq[length - 2], -xs[length - 1], ys[length - 1]])
    return length


def lex_leq(left: Sequence[bool], right: Sequence[bool]) -> bool:
    """Arithmetic reference: left <=_lex right with False < True."""
    return tuple(map(bool, left)) <= tuple(map(bool, right))
