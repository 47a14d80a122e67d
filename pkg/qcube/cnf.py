import hashlib
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

from qcube.errors import DimacsError

Lit = int
Clause = List[Lit]


def neg(lit: Lit) -> Lit:
    return -lit


def lit_var(lit: Lit) -> int:
    return abs(lit)


def format_key(key: Hashable) -> str:
    """Render a registry key like ("p", 3, 5) as p(3,5)."""
    if isinstance(key, tuple) and key and isinstance(key[0], str):
        return f"{key[0]}({','.join(str(part) for part in key[1:])})"
    return str(key)


@dataclass(frozen=True)
class Cube:
    """A conjunction of literals, one per variable at most."""

    literals: Tuple[Lit, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "literals", tuple(int(l) for l in self.literals))
        variables = [abs(l) for l in self.literals]
        if 0 in variables:
            raise ValueError("literal 0 is not allowed in a cube")
        if len(set(variables)) != len(variables):
            raise ValueError(f"variable repeated in cube {self.literals}")

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def to_line(self) -> str:
        return " ".join(["a", *map(str, self.literals), "0"])


class CnfFormula:
    """
    A CNF formula with a deterministic registry of named variables.

    Variables are allocated in the order they are first requested, so building
    the same encoding twice produces identical variable numbers and clause
    lists. Clauses are normalized on insertion: duplicate literals are merged and
    tautologies are dropped. An empty clause is kept and makes the formula
    unsatisfiable.

    Attributes
    ----------
    num_vars : int
        Highest allocated variable index
    clauses : list of list of int
        DIMACS-style clauses
    registry : dict
        Maps semantic keys such as ("r", u, v) to variable indices
    meta : dict
        Free-form description of how the formula was built (dimension, scheme, sources)

    Methods
    -------
    var(key)
        Index of the named variable, allocating it on first use
    new_var(key=None)
        Allocate a fresh variable, optionally named
    add_clause(lits)
        Append one normalized clause
    fresh_tag(prefix)
        A unique namespace for auxiliary variables of one constraint
    """

    def __init__(self) -> None:
        self.num_vars = 0
        self.clauses: List[Clause] = []
        self.registry: Dict[Hashable, int] = {}
        self.names: List[Optional[Hashable]] = []
        self.meta: Dict[str, object] = {}
        self._tags: Dict[str, int] = {}

    def var(self, key: Hashable) -> int:
        index = self.registry.get(key)
        if index is None:
            index = self.new_var(key)
        return index

    def new_var(self, key: Optional[Hashable] = None) -> int:
        if key is not None and key in self.registry:
            raise KeyError(f"variable {format_key(key)} already registered")
        self.num_vars += 1
        self.names.append(key)
        if key is not None:
            self.registry[key] = self.num_vars
        return self.num_vars

    def lookup(self, key: Hashable) -> Optional[int]:
        return self.registry.get(key)

    def __contains__(self, key: Hashable) -> bool:
        return key in self.registry

    def name_of(self, var: int) -> Optional[Hashable]:
        return self.names[var - 1]

    def fresh_tag(self, prefix: str) -> str:
        count = self._tags.get(prefix, 0)
        self._tags[prefix] = count + 1
        return f"{prefix}{count}"

    def add_clause(self, lits: Iterable[Lit]) -> bool:
        seen = set()
        clause: Clause = []
        for lit in lits:
            lit = int(lit)
            if lit == 0 or abs(lit) > self.num_vars:
                raise ValueError(f"literal {lit} outside 1..{self.num_vars}")
            if -lit in seen:
                return False
            if lit not in seen:
                seen.add(lit)
                clause.append(lit)
        self.clauses.append(clause)
        return True

    def add_clauses(self, clauses: Iterable[Iterable[Lit]]) -> None:
        for clause in clauses:
            self.add_clause(clause)

    def add_empty_clause(self) -> None:
        self.clauses.append([])

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def copy(self) -> "CnfFormula":
        out = CnfFormula()
        out.num_vars = self.num_vars
        out.clauses = [list(c) for c in self.clauses]
        out.registry = dict(self.registry)
        out.names = list(self.names)
        out.meta = dict(self.meta)
        out._tags = dict(self._tags)
        return out

    def with_units(self, lits: Iterable[Lit]) -> "CnfFormula":
        """A copy with every literal of `lits` asserted as a unit clause."""
        out = self.copy()
        for lit in lits:
            out.add_clause([lit])
        return out

    def to_dimacs(self) -> str:
        sink = io.StringIO()
        write_dimacs(self, sink)
        return sink.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.to_dimacs().encode()).hexdigest()

    def __repr__(self) -> str:
        return f"CnfFormula(vars={self.num_vars}, clauses={self.num_clauses})"


def write_dimacs(f: CnfFormula, sink: TextIO) -> None:
    sink.write(f"p cnf {f.num_vars} {f.num_clauses}\n")
    for clause in f.clauses:
        sink.write(" ".join(map(str, clause)) + " 0\n" if clause else "0\n")


def save_dimacs(f: CnfFormula, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w") as sink:
        write_dimacs(f, sink)
    return path


def _clause_tokens(lines: Iterable[str]) -> Iterable[Tuple[int, List[str]]]:
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        yield lineno, line.split()


def parse_dimacs(source: Iterable[str]) -> CnfFormula:
    """
    Parse DIMACS CNF from an iterable of lines (an open file works).

    Raises
    ------
    DimacsError
        On a missing or malformed header, a non-integer token, a literal beyond the
        declared variable count, an unterminated clause, or a clause count that
        does not match the header.
    """
    f: Optional[CnfFormula] = None
    expected = 0
    current: Clause = []
    for lineno, tokens in _clause_tokens(source):
        if tokens[0] == "p":
            if f is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad header {' '.join(tokens)!r}")
            try:
                num_vars, expected = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: bad header counts") from None
            if num_vars < 0 or expected < 0:
                raise DimacsError(f"line {lineno}: negative header counts")
            f = CnfFormula()
            f.num_vars = num_vars
            f.names = [None] * num_vars
            continue
        if f is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for token in tokens:
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad literal {token!r}") from None
            if lit == 0:
                f.clauses.append(current)
                current = []
            elif abs(lit) > f.num_vars:
                raise DimacsError(f"line {lineno}: literal {lit} exceeds {f.num_vars} variables")
            else:
                current.append(lit)
    if f is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("last clause is not terminated by 0")
    if f.num_clauses != expected:
        raise DimacsError(f"header declares {expected} clauses, found {f.num_clauses}")
    return f


def load_dimacs(path: Union[str, Path]) -> CnfFormula:
    with Path(path).open() as source:
        return parse_dimacs(source)


def write_icnf(f: CnfFormula, cubes: Sequence[Cube], sink: TextIO) -> None:
    for cube in cubes:
        if any(abs(l) > f.num_vars for l in cube):
            raise ValueError(f"cube {cube.literals} uses variables beyond {f.num_vars}")
    sink.write("p inccnf\n")
    for clause in f.clauses:
        sink.write(" ".join(map(str, clause)) + " 0\n" if clause else "0\n")
    for cube in cubes:
        sink.write(cube.to_line() + "\n")


def parse_cubes(source: Iterable[str]) -> List[Cube]:
    """Read the `a ... 0` lines of an iCNF or cube file, ignoring everything else."""
    cubes = []
    for lineno, line in enumerate(source, start=1):
        tokens = line.split()
        if not tokens or tokens[0] != "a":
            continue
        if tokens[-1] != "0":
            raise DimacsError(f"line {lineno}: cube not terminated by 0")
        try:
            lits = [int(t) for t in tokens[1:-1]]
        except ValueError:
            raise DimacsError(f"line {lineno}: bad cube literal") from None
        if 0 in lits:
            raise DimacsError(f"line {lineno}: literal 0 inside cube")
        try:
            cubes.append(Cube(tuple(lits)))
        except ValueError as exc:
            raise DimacsError(f"line {lineno}: {exc}") from None
    return cubes


def parse_icnf(source: Iterable[str]) -> Tuple[CnfFormula, List[Cube]]:
    lines = list(source)
    if not lines or lines[0].split()[:2] != ["p", "inccnf"]:
        raise DimacsError("missing 'p inccnf' header")
    clauses: List[Clause] = []
    current: Clause = []
    for lineno, tokens in _clause_tokens(lines[1:]):
        if tokens[0] == "a":
            continue
        for token in tokens:
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno + 1}: bad literal {token!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    cubes = parse_cubes(lines)
    f = CnfFormula()
    f.num_vars = max(
        [abs(l) for c in clauses for l in c] + [abs(l) for cube in cubes for l in cube] + [0]
    )
    f.names = [None] * f.num_vars
    f.clauses = clauses
    return f, cubes


def write_registry(f: CnfFormula, sink: TextIO) -> None:
    """Sidecar with one `<name> <index>` line per named variable."""
    for index, key in enumerate(f.names, start=1):
        if key is not None:
            sink.write(f"{format_key(key)} {index}\n")


def read_registry(source: Iterable[str]) -> Dict[str, int]:
    out = {}
    for lineno, line in enumerate(source, start=1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 2:
            raise DimacsError(f"registry line {lineno}: expected '<name> <index>'")
        out[parts[0]] = int(parts[1])
    return out


def assignment(model: Union[Iterable[Lit], Mapping[int, bool]]) -> Dict[int, bool]:
    """Normalize a model given as signed literals or as {var: value} into {var: value}."""
    if isinstance(model, Mapping):
        return {int(var): bool(value) for var, value in model.items()}
    return {abs(int(lit)): int(lit) > 0 for lit in model if int(lit) != 0}


def falsified_clause(clauses: Iterable[Sequence[Lit]], model: Union[Iterable[Lit], Mapping[int, bool]]) -> Optional[List[Lit]]:
    """The first clause not satisfied by `model`, or None. Unassigned variables count as false literals."""
    values = assignment(model)
    for clause in clauses:
        if not any(values.get(abs(lit), None) == (lit > 0) for lit in clause):
            return list(clause)
    return None
