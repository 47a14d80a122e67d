"""
Run manifests, the JSON record store and the measured-vs-published tables.
"""
import hashlib
import json
import logging
import platform
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from qcube.constants import CONJ1, CONJ2, KIND_F, KIND_FHAT, KIND_MU, RECORD_VERSION

logger = logging.getLogger(__name__)

PACKAGES = ("numpy", "pandas", "networkx", "python-sat")

ENCODING_SIZES = "encoding-sizes"
BOUNDS = "bounds"
MU = "mu"
TABLE_KINDS = (ENCODING_SIZES, BOUNDS, MU)

# published sizes (rounded): n -> (vars Phi, vars Psi, clauses Phi, clauses Psi),
# reproduced by encodings built with SIZE_TABLE_CONFIG (encode --all-sources --max-comp 13)
PUBLISHED_SIZES: Dict[int, Tuple[int, int, int, int]] = {
    4: (776, 760, 2_400, 2_100),
    5: (2_200, 2_200, 8_100, 6_200),
    6: (6_500, 6_500, 30_400, 20_000),
    7: (21_400, 21_300, 125_500, 73_500),
    8: (76_200, 76_000, 544_700, 296_900),
    9: (285_600, 285_100, 2_400_000, 1_300_000),
}

# n -> (mu(n), exact); 7 is only a lower bound
PUBLISHED_MU: Dict[int, Tuple[int, bool]] = {2: (0, True), 3: (1, True), 4: (2, True), 5: (6, True), 6: (14, True), 7: (29, False)}

# k -> (f(k), f-hat(k))
PUBLISHED_BOUNDS: Dict[int, Tuple[Fraction, Fraction]] = {
    3: (Fraction(1), Fraction(1, 2)),
    4: (Fraction(5, 4), Fraction(1, 2)),
    5: (Fraction(5, 4), Fraction(7, 8)),
    6: (Fraction(3, 2), Fraction(7, 8)),
}

# f-hat(2) is not published; the exhaustive sweep over Q_2 gives 1/2
KNOWN_FHAT: Dict[int, Fraction] = {2: Fraction(1, 2), **{k: v[1] for k, v in PUBLISHED_BOUNDS.items()}}
KNOWN_F: Dict[int, Fraction] = {2: Fraction(1), **{k: v[0] for k, v in PUBLISHED_BOUNDS.items()}}


def sha256_file(path: Union[str, Path]) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as source:
        for block in iter(lambda: source.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def tool_versions() -> Dict[str, Optional[str]]:
    versions: Dict[str, Optional[str]] = {"python": platform.python_version()}
    for name in PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


@dataclass
class RunManifest:
    """
    What a subcommand ran with and what it produced.

    Attributes
    ----------
    subcommand : str
    params : dict
        The full parameter set
    seed : int, optional
    inputs, outputs : dict
        File path -> sha256 of its bytes
    versions : dict
        Interpreter and library versions
    wall_time, cpu_time : float
    """

    subcommand: str
    params: Dict[str, object]
    seed: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    versions: Dict[str, Optional[str]] = field(default_factory=tool_versions)
    wall_time: float = 0.0
    cpu_time: float = 0.0
    _started: Tuple[float, float] = field(default=(0.0, 0.0), repr=False)

    @classmethod
    def start(cls, subcommand: str, params: Dict[str, object], seed: Optional[int] = None) -> "RunManifest":
        manifest = cls(subcommand, dict(params), seed)
        manifest._started = (time.perf_counter(), time.process_time())
        return manifest

    def add_input(self, path: Union[str, Path]) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: Union[str, Path]) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def finish(self) -> "RunManifest":
        wall, cpu = self._started
        self.wall_time = time.perf_counter() - wall
        self.cpu_time = time.process_time() - cpu
        return self

    def to_record(self) -> Dict[str, object]:
        return {
            "subcommand": self.subcommand,
            "params": self.params,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "versions": self.versions,
            "argv": sys.argv[1:],
            "wall_time": self.wall_time,
            "cpu_time": self.cpu_time,
        }

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_record(), indent=2, default=str) + "\n")
        return path


class RecordStore:
    """
    A directory of JSON records, one file per (kind, key); saving the same key again replaces it.
    """

    def __init__(self, directory: Union[str, Path]) -> None:
        self.directory = Path(directory)

    def path_for(self, name: str) -> Path:
        return self.directory / f"{name}.json"

    def save(self, name: str, record: Dict[str, object]) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(name)
        path.write_text(json.dumps({"record_version": RECORD_VERSION, **record}, indent=2, default=str) + "\n")
        logger.debug("record %s written", path)
        return path

    def load_all(self, kind: Optional[str] = None) -> List[Dict[str, object]]:
        if not self.directory.is_dir():
            return []
        out = []
        for path in sorted(self.directory.glob("*.json")):
            try:
                record = json.loads(path.read_text())
            except json.JSONDecodeError:
                logger.warning("skipping unreadable record %s", path)
                continue
            if kind is None or record.get("kind") == kind:
                out.append(record)
        return out


@dataclass
class TableReport:
    kind: str
    frame: pd.DataFrame
    missing: List[str]

    def render(self) -> str:
        text = self.frame.to_string(index=False)
        if self.missing:
            text += "\nmissing records: " + ", ".join(self.missing)
        return text

    def to_record(self) -> Dict[str, object]:
        return {
            "kind": "table",
            "table": self.kind,
            "rows": json.loads(self.frame.to_json(orient="records")),
            "missing": self.missing,
        }


def _deviation(measured: Optional[float], published: float) -> Optional[float]:
    if measured is None:
        return None
    return (measured - published) / published


def _encoding_table(store: RecordStore, tolerance: float) -> TableReport:
    sizes: Dict[Tuple[int, int], Dict[str, object]] = {}
    for record in store.load_all("encoding"):
        sizes[(int(record["target"]), int(record["n"]))] = record
    rows, missing = [], []
    for n, published in PUBLISHED_SIZES.items():
        row: Dict[str, object] = {"n": n}
        flagged = False
        for target, name, offset in ((CONJ1, "phi", 0), (CONJ2, "psi", 1)):
            record = sizes.get((target, n))
            if record is None:
                missing.append(f"{name}_{n}")
            for field_name, base in (("vars", 0), ("clauses", 2)):
                value = int(record["variables" if field_name == "vars" else "clauses"]) if record else None
                reference = published[base + offset]
                dev = _deviation(value, reference)
                row[f"{field_name}_{name}"] = value
                row[f"published_{field_name}_{name}"] = reference
                row[f"dev_{field_name}_{name}"] = None if dev is None else round(dev, 4)
                flagged = flagged or (dev is not None and abs(dev) > tolerance)
        row["flag"] = flagged
        rows.append(row)
    return TableReport(ENCODING_SIZES, pd.DataFrame(rows), missing)


def _measured_values(store: RecordStore) -> Dict[Tuple[str, int], str]:
    """(bound kind, n) -> value from bound-search and oracle records; SAT-based values win."""
    out: Dict[Tuple[str, int], str] = {}
    for kind in ("oracle", "bound"):
        for record in store.load_all(kind):
            if kind == "bound" and not record.get("exact", False):
                continue
            out[(str(record["bound"]), int(record["n"]))] = str(record["value"])
    return out


def _bounds_table(store: RecordStore) -> TableReport:
    measured = _measured_values(store)
    rows, missing = [], []
    for k, (f_ref, fhat_ref) in PUBLISHED_BOUNDS.items():
        row: Dict[str, object] = {"k": k}
        flagged = False
        for kind, reference in ((KIND_F, f_ref), (KIND_FHAT, fhat_ref)):
            value = measured.get((kind, k))
            if value is None:
                missing.append(f"{kind}({k})")
            row[kind] = value
            row[f"published_{kind}"] = str(reference)
            row[f"float_{kind}"] = float(reference)
            flagged = flagged or (value is not None and Fraction(value) != reference)
        row["flag"] = flagged
        rows.append(row)
    return TableReport(BOUNDS, pd.DataFrame(rows), missing)


def _mu_table(store: RecordStore) -> TableReport:
    measured = _measured_values(store)
    rows, missing = [], []
    for n, (reference, exact) in PUBLISHED_MU.items():
        value = measured.get((KIND_MU, n))
        if value is None:
            missing.append(f"mu({n})")
            flagged = False
        else:
            flagged = int(value) != reference if exact else int(value) < reference
        rows.append({"n": n, "mu": value, "published_mu": reference if exact else f">={reference}", "flag": flagged})
    return TableReport(MU, pd.DataFrame(rows), missing)


def report_table(kind: str, store: RecordStore, tolerance: float = 0.05) -> TableReport:
    """
    Measured values next to the published ones.

    Rows whose measurement deviates (sizes beyond `tolerance`, bounds and mu at
    all) are flagged; absent records are listed in `missing`.
    """
    if kind == ENCODING_SIZES:
        report = _encoding_table(store, tolerance)
    elif kind == BOUNDS:
        report = _bounds_table(store)
    elif kind == MU:
        report = _mu_table(store)
    else:
        raise ValueError(f"unknown table {kind!r}, expected one of {TABLE_KINDS}")
    if report.missing:
        logger.warning("%s: %d missing records", kind, len(report.missing))
    return report
