"""
Cube-and-conquer campaigns.

Worker threads solve F with one cube at a time and hand their outcomes to the
coordinator, the only writer of the journal. The journal is append-only JSON
lines: a header identifying the formula and cube list, then one entry per
finished attempt. Replaying it gives the latest state of every cube, so an
interrupted campaign resumes by skipping cubes that are already SAT or UNSAT.
"""
import json
import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from qcube.cnf import CnfFormula, Cube, Lit
from qcube.constants import JOURNAL_VERSION
from qcube.errors import ModelCheckError
from qcube.solvers.base import SolveResult, SolveStatus, SolverSpec

logger = logging.getLogger(__name__)

PENDING = "PENDING"
# TIMEOUT and ERROR cubes are solved again when a campaign resumes
TERMINAL = (SolveStatus.SAT.value, SolveStatus.UNSAT.value)
MAX_ATTEMPTS = 2

SolveFn = Callable[[CnfFormula, Sequence[Lit]], SolveResult]


@dataclass
class CubeOutcome:
    index: int
    status: str = PENDING
    wall_time: float = 0.0
    attempt: int = 0
    model: Optional[List[Lit]] = None

    @property
    def terminal(self) -> bool:
        return self.status in TERMINAL

    def to_entry(self) -> Dict[str, object]:
        return {
            "type": "cube",
            "index": self.index,
            "status": self.status,
            "wall": self.wall_time,
            "attempt": self.attempt,
            "model": self.model,
        }


def aggregate_verdict(outcomes: Sequence[CubeOutcome]) -> SolveStatus:
    """SAT if any cube is SAT, UNSAT if every cube is UNSAT, UNKNOWN otherwise."""
    if any(o.status == SolveStatus.SAT.value for o in outcomes):
        return SolveStatus.SAT
    if all(o.status == SolveStatus.UNSAT.value for o in outcomes):
        return SolveStatus.UNSAT
    return SolveStatus.UNKNOWN


@dataclass
class CubeCampaign:
    """
    Attributes
    ----------
    formula : CnfFormula
        The base formula F
    cubes : list of Cube
        A cover of the assignments, e.g. from generate_cubes
    workers : int
    journal : Path, optional
        JSON-lines file with the per-cube results
    static : bool
        Give cube i to worker i mod W instead of a shared queue
    formula_path : str, optional
        Where the base formula is stored, recorded in the journal header
    """

    formula: CnfFormula
    cubes: List[Cube]
    workers: int = 1
    journal: Optional[Path] = None
    static: bool = False
    formula_path: Optional[str] = None
    outcomes: List[CubeOutcome] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError(f"at least one worker is needed, got {self.workers}")
        if self.journal is not None:
            self.journal = Path(self.journal)
        if not self.outcomes:
            self.outcomes = [CubeOutcome(i) for i in range(len(self.cubes))]

    def header(self) -> Dict[str, object]:
        return {
            "type": "header",
            "version": JOURNAL_VERSION,
            "digest": self.formula.digest(),
            "formula": self.formula_path,
            "cubes": [list(cube.literals) for cube in self.cubes],
            "workers": self.workers,
            "static": self.static,
        }

    def verdict(self) -> SolveStatus:
        return aggregate_verdict(self.outcomes)

    def pending(self) -> List[int]:
        return [o.index for o in self.outcomes if not o.terminal]


@dataclass
class CampaignReport:
    verdict: SolveStatus
    model: Optional[List[Lit]]
    outcomes: List[CubeOutcome]
    wall_time: float
    cpu_time: float

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for o in self.outcomes:
            out[o.status] = out.get(o.status, 0) + 1
        return out

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": "campaign",
            "verdict": self.verdict.value,
            "cubes": len(self.outcomes),
            "counts": self.counts(),
            "wall_time": self.wall_time,
            "cpu_time": self.cpu_time,
            "cube_wall_times": [o.wall_time for o in self.outcomes],
            "model": self.model,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=2)


def replay_journal(path: Union[str, Path]) -> Tuple[Dict[str, object], Dict[int, CubeOutcome]]:
    """
    Latest outcome per cube index from a journal.

    A truncated last line (an interrupted write) is ignored.
    """
    header: Optional[Dict[str, object]] = None
    outcomes: Dict[int, CubeOutcome] = {}
    with Path(path).open() as source:
        lines = source.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError:
            if lineno == len(lines):
                logger.warning("journal %s: ignoring truncated last line", path)
                break
            raise ValueError(f"journal {path} line {lineno} is not JSON") from None
        if entry.get("type") == "header":
            header = entry
        elif entry.get("type") == "cube":
            index = int(entry["index"])
            outcomes[index] = CubeOutcome(
                index, entry["status"], float(entry["wall"]), int(entry["attempt"]), entry.get("model")
            )
    if header is None:
        raise ValueError(f"journal {path} has no header")
    return header, outcomes


def _drop_partial_line(path: Path) -> None:
    data = path.read_bytes()
    if not data or data.endswith(b"\n"):
        return
    cut = data.rfind(b"\n") + 1
    try:
        json.loads(data[cut:])
    except ValueError:
        path.write_bytes(data[:cut])
    else:
        path.write_bytes(data + b"\n")


def _load_previous(campaign: CubeCampaign) -> None:
    header, outcomes = replay_journal(campaign.journal)
    if header["digest"] != campaign.formula.digest():
        raise ValueError(f"journal {campaign.journal} belongs to a different formula")
    if header["cubes"] != [list(cube.literals) for cube in campaign.cubes]:
        raise ValueError(f"journal {campaign.journal} belongs to a different cube list")
    for index, outcome in outcomes.items():
        campaign.outcomes[index] = outcome


def _worker(
    formula: CnfFormula,
    cubes: List[Cube],
    tasks: "queue.Queue[int]",
    results: "queue.Queue",
    stop: threading.Event,
    solve_fn: SolveFn,
) -> None:
    while not stop.is_set():
        try:
            index = tasks.get_nowait()
        except queue.Empty:
            break
        for attempt in range(1, MAX_ATTEMPTS + 1):
            start = time.perf_counter()
            try:
                result = solve_fn(formula, cubes[index].literals)
            except ModelCheckError as exc:
                results.put(("fatal", index, exc))
                stop.set()
                break
            except Exception as exc:
                logger.warning("cube %d attempt %d failed: %s", index, attempt, exc)
                status, model = SolveStatus.ERROR.value, None
            else:
                status, model = result.status.value, result.model
                if result.status is SolveStatus.UNKNOWN:
                    status = SolveStatus.ERROR.value
            outcome = CubeOutcome(index, status, time.perf_counter() - start, attempt, model)
            results.put(("outcome", index, outcome))
            if status != SolveStatus.ERROR.value or stop.is_set():
                break
    results.put(("done", None, None))


def run_campaign(
    campaign: CubeCampaign,
    spec: Optional[SolverSpec] = None,
    resume: bool = False,
    solve_fn: Optional[SolveFn] = None,
) -> CampaignReport:
    """
    Solve every pending cube of `campaign` and aggregate the verdict.

    A SAT cube stops the campaign. A failing cube is journaled as ERROR and
    retried once; cubes left pending or in error make the verdict UNKNOWN.

    Raises
    ------
    ModelCheckError
        If a worker received a model that falsifies the formula
    """
    if solve_fn is None:
        if spec is None:
            raise ValueError("run_campaign needs a solver spec or a solve function")
        from qcube.solvers.external import solve

        def solve_fn(f: CnfFormula, assumptions: Sequence[Lit]) -> SolveResult:
            return solve(f, spec, assumptions)

    if resume and campaign.journal is not None and campaign.journal.exists():
        _load_previous(campaign)
        _drop_partial_line(campaign.journal)
        sink = campaign.journal.open("a")
    elif campaign.journal is not None:
        sink = campaign.journal.open("w")
        sink.write(json.dumps(campaign.header()) + "\n")
        sink.flush()
    else:
        sink = None

    pending = campaign.pending()
    logger.info(
        "campaign: %d cubes, %d pending, %d workers (%s)",
        len(campaign.cubes), len(pending), campaign.workers, "static" if campaign.static else "dynamic",
    )
    started = time.perf_counter()
    if campaign.static:
        queues = [queue.Queue() for _ in range(campaign.workers)]
        for index in pending:
            queues[index % campaign.workers].put(index)
    else:
        shared: "queue.Queue[int]" = queue.Queue()
        for index in pending:
            shared.put(index)
        queues = [shared] * campaign.workers

    results: "queue.Queue" = queue.Queue()
    stop = threading.Event()
    if any(o.status == SolveStatus.SAT.value for o in campaign.outcomes):
        stop.set()
    threads = [
        threading.Thread(
            target=_worker,
            args=(campaign.formula, campaign.cubes, queues[w], results, stop, solve_fn),
            name=f"cube-worker-{w}",
            daemon=True,
        )
        for w in range(campaign.workers)
    ]
    for thread in threads:
        thread.start()

    fatal: Optional[ModelCheckError] = None
    finished = 0
    try:
        while finished < len(threads):
            kind, index, payload = results.get()
            if kind == "done":
                finished += 1
            elif kind == "fatal":
                fatal = fatal or payload
            else:
                campaign.outcomes[index] = payload
                if sink is not None:
                    sink.write(json.dumps(payload.to_entry()) + "\n")
                    sink.flush()
                logger.info("cube %d: %s in %.2fs", index, payload.status, payload.wall_time)
                if payload.status == SolveStatus.SAT.value:
                    stop.set()
    finally:
        for thread in threads:
            thread.join()
        if sink is not None:
            sink.close()
    if fatal is not None:
        raise fatal

    verdict = campaign.verdict()
    model = next((o.model for o in campaign.outcomes if o.status == SolveStatus.SAT.value), None)
    report = CampaignReport(
        verdict,
        model,
        list(campaign.outcomes),
        time.perf_counter() - started,
        sum(o.wall_time for o in campaign.outcomes),
    )
    logger.info("campaign verdict %s (%s)", verdict.value, report.counts())
    return report
