import os
import shlex
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Union

from qcube.cnf import CnfFormula, Lit, falsified_clause
from qcube.constants import DEFAULT_TIMEOUT, SAT_EXIT, SOLVER_ENV_PREFIX, UNSAT_EXIT
from qcube.errors import ModelCheckError

INTERNAL = "internal"
SUBPROCESS = "subprocess"
PYSAT = "pysat"
BACKENDS = (INTERNAL, SUBPROCESS, PYSAT)


class SolveStatus(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"
    UNKNOWN = "UNKNOWN"
    ERROR = "ERROR"

    @property
    def is_verdict(self) -> bool:
        return self in (SolveStatus.SAT, SolveStatus.UNSAT)


@dataclass
class SolveResult:
    """
    Outcome of one solver call.

    Attributes
    ----------
    status : SolveStatus
    model : list of int, optional
        Signed literals for every variable 1..num_vars when SAT
    wall_time : float
    backend : str
    exit_code : int, optional
        Process exit code for the subprocess backend
    stats : dict
    """

    status: SolveStatus
    model: Optional[List[Lit]] = None
    wall_time: float = 0.0
    backend: str = INTERNAL
    exit_code: Optional[int] = None
    stats: Dict[str, object] = field(default_factory=dict)

    @property
    def is_sat(self) -> bool:
        return self.status is SolveStatus.SAT

    @property
    def is_unsat(self) -> bool:
        return self.status is SolveStatus.UNSAT

    def to_record(self) -> Dict[str, object]:
        return {
            "status": self.status.value,
            "wall_time": self.wall_time,
            "backend": self.backend,
            "exit_code": self.exit_code,
            "stats": dict(self.stats),
        }


PRESETS: Dict[str, Dict[str, object]] = {
    "kissat": {"command": "kissat -q {formula}", "backend": SUBPROCESS},
    "cadical": {"command": "cadical -q {formula}", "backend": SUBPROCESS},
    "internal": {"command": "", "backend": INTERNAL},
    "pysat": {"command": "", "backend": PYSAT, "pysat_name": "cadical153"},
}


@dataclass(frozen=True)
class SolverSpec:
    """
    How to run a SAT solver.

    Attributes
    ----------
    command : str
        Command template; `{formula}` is replaced by the DIMACS path
    sat_exit_code, unsat_exit_code : int
    timeout : float
        Seconds; the call reports TIMEOUT when exceeded
    backend : str
        "subprocess", "internal" or "pysat"
    pysat_name : str
        Solver name for the pysat backend
    conflict_budget : int, optional
        Conflict limit of the internal backend
    name : str
    """

    command: str = ""
    sat_exit_code: int = SAT_EXIT
    unsat_exit_code: int = UNSAT_EXIT
    timeout: float = DEFAULT_TIMEOUT
    backend: str = SUBPROCESS
    pysat_name: str = "cadical153"
    conflict_budget: Optional[int] = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.sat_exit_code == self.unsat_exit_code:
            raise ValueError("SAT and UNSAT exit codes must differ")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}, expected one of {BACKENDS}")
        if self.backend == SUBPROCESS and "{formula}" not in self.command:
            raise ValueError("a subprocess command needs a {formula} placeholder")

    @classmethod
    def preset(cls, name: str, env: Optional[Mapping[str, str]] = None, **overrides) -> "SolverSpec":
        """
        A named solver configuration.

        QCUBE_SOLVER_<NAME> in `env` replaces the executable of a subprocess preset.
        """
        key = name.lower()
        if key not in PRESETS:
            raise ValueError(f"unknown solver {name!r}, expected one of {sorted(PRESETS)}")
        options = dict(PRESETS[key], name=key)
        env = os.environ if env is None else env
        binary = env.get(SOLVER_ENV_PREFIX + key.upper())
        if binary and options["backend"] == SUBPROCESS:
            argv = shlex.split(str(options["command"]))
            options["command"] = shlex.join([binary, *argv[1:]])
        options.update(overrides)
        return cls(**options)

    @classmethod
    def from_command(cls, command: str, **overrides) -> "SolverSpec":
        return cls(command=command, backend=SUBPROCESS, **overrides)

    def argv(self, formula: Union[str, os.PathLike]) -> List[str]:
        return [token.replace("{formula}", str(formula)) for token in shlex.split(self.command)]

    def with_(self, **changes) -> "SolverSpec":
        return replace(self, **changes)


def check_model(f: CnfFormula, model: Sequence[Lit], extra: Sequence[Sequence[Lit]] = ()) -> None:
    """
    Check a model clause by clause.

    Raises
    ------
    ModelCheckError
        With the first falsified clause of `f` (or of `extra`, e.g. cube units)
    """
    clause = falsified_clause(list(f.clauses) + [list(c) for c in extra], model)
    if clause is not None:
        raise ModelCheckError(clause)


def complete_model(model: Sequence[Lit], num_vars: int) -> List[Lit]:
    """Signed literals for 1..num_vars; variables missing from `model` are set false."""
    values = {abs(l): l > 0 for l in model if l}
    return [v if values.get(v, False) else -v for v in range(1, num_vars + 1)]
