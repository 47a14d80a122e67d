import itertools
import logging
import os
import subprocess
import tempfile
from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence, Union

from qcube.cnf import CnfFormula, Cube, parse_cubes, save_dimacs
from qcube.constants import DEFAULT_TIMEOUT, MARCH_ENV, UNSAT_EXIT
from qcube.errors import SolverError

logger = logging.getLogger(__name__)

BUILTIN = "builtin"
MARCH = "march"
SPLITTERS = (BUILTIN, MARCH)


def split_variables(f: CnfFormula, depth: int) -> List[int]:
    """The `depth` most frequent variables of non-unit clauses, skipping variables fixed by a unit."""
    fixed = {abs(c[0]) for c in f.clauses if len(c) == 1}
    counts: Counter = Counter(abs(l) for c in f.clauses if len(c) > 1 for l in c)
    ranked = sorted((v for v in counts if v not in fixed), key=lambda v: (-counts[v], v))
    if len(ranked) < depth:
        raise ValueError(f"depth {depth} exceeds the {len(ranked)} splittable variables")
    return ranked[:depth]


def builtin_cubes(f: CnfFormula, depth: int) -> List[Cube]:
    """All 2^depth sign patterns over the split variables, negative literals first."""
    variables = split_variables(f, depth)
    return [
        Cube(tuple(v if positive else -v for v, positive in zip(variables, signs)))
        for signs in itertools.product((False, True), repeat=depth)
    ]


def march_cubes(f: CnfFormula, depth: int, tool: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT) -> List[Cube]:
    """
    Cubes from a look-ahead cuber (march_cu command line: `<tool> <cnf> -d <depth> -o <out>`).

    An empty list means the tool refuted the formula outright.
    """
    tool = tool or os.environ.get(MARCH_ENV, "march_cu")
    with tempfile.TemporaryDirectory(prefix="qcube-") as tmp:
        source = save_dimacs(f, Path(tmp) / "formula.cnf")
        target = Path(tmp) / "cubes.icnf"
        argv = [tool, str(source), "-d", str(depth), "-o", str(target)]
        logger.debug("running %s", " ".join(argv))
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise SolverError(f"cube tool {tool!r} not found") from None
        except subprocess.TimeoutExpired:
            raise SolverError(f"cube tool timed out after {timeout}s") from None
        if proc.returncode == UNSAT_EXIT:
            return []
        if not target.exists():
            raise SolverError(f"{tool} exited with code {proc.returncode} and wrote no cubes")
        with target.open() as source_lines:
            cubes = parse_cubes(source_lines)
    if not cubes:
        raise SolverError(f"{tool} produced no cubes")
    return cubes


def generate_cubes(
    f: CnfFormula, depth: int, splitter: str = BUILTIN, tool: Optional[str] = None, timeout: float = DEFAULT_TIMEOUT
) -> List[Cube]:
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if splitter == BUILTIN:
        cubes = builtin_cubes(f, depth)
    elif splitter == MARCH:
        cubes = march_cubes(f, depth, tool, timeout)
    else:
        raise ValueError(f"unknown splitter {splitter!r}, expected one of {SPLITTERS}")
    logger.info("%s splitter: %d cubes at depth %d", splitter, len(cubes), depth)
    return cubes


def save_cubes(cubes: Sequence[Cube], path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w") as sink:
        for cube in cubes:
            sink.write(cube.to_line() + "\n")
    return path


def load_cubes(path: Union[str, Path]) -> List[Cube]:
    with Path(path).open() as source:
        return parse_cubes(source)


def is_cover(cubes: Sequence[Cube], max_vars: int = 20) -> bool:
    """Whether every assignment to the cube variables extends some cube (exhaustive)."""
    variables = sorted({abs(l) for cube in cubes for l in cube})
    if len(variables) > max_vars:
        raise ValueError(f"{len(variables)} cube variables exceed the exhaustive limit {max_vars}")
    sets = [set(cube.literals) for cube in cubes]
    for signs in itertools.product((False, True), repeat=len(variables)):
        point = {v if s else -v for v, s in zip(variables, signs)}
        if not any(cube <= point for cube in sets):
            return False
    return True
