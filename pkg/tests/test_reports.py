import json

import pytest

from qcube.reports import (
    BOUNDS,
    ENCODING_SIZES,
    MU,
    RecordStore,
    RunManifest,
    report_table,
    sha256_file,
    tool_versions,
)


def test_manifest_records_hashes_and_times(tmp_path):
    data = tmp_path / "in.cnf"
    data.write_text("p cnf 0 0\n")
    manifest = RunManifest.start("solve", {"cnf": str(data)}, seed=3)
    manifest.add_input(data)
    record = manifest.finish().to_record()
    assert record["inputs"] == {str(data): sha256_file(data)}
    assert record["seed"] == 3 and record["wall_time"] >= 0
    written = manifest.write(tmp_path / "manifest.json")
    assert json.loads(written.read_text())["subcommand"] == "solve"


def test_tool_versions_lists_the_stack():
    versions = tool_versions()
    assert versions["python"]
    assert {"numpy", "pandas", "networkx", "python-sat"} <= set(versions)


def test_record_store(tmp_path):
    store = RecordStore(tmp_path / "records")
    assert store.load_all() == []
    store.save("a", {"kind": "oracle", "bound": "f", "n": 3, "value": "1"})
    store.save("b", {"kind": "bound", "bound": "mu", "n": 3, "value": "1", "exact": True})
    (tmp_path / "records" / "broken.json").write_text("{")
    assert [r["kind"] for r in store.load_all()] == ["oracle", "bound"]
    assert store.load_all("oracle")[0]["record_version"] == 1


def test_encoding_table_flags_deviations(tmp_path):
    store = RecordStore(tmp_path)
    store.save("phi4", {"kind": "encoding", "target": 1, "n": 4, "variables": 776, "clauses": 2_400})
    store.save("psi4", {"kind": "encoding", "target": 2, "n": 4, "variables": 1_000, "clauses": 2_100})
    report = report_table(ENCODING_SIZES, store)
    row = report.frame.set_index("n").loc[4]
    assert row["dev_vars_phi"] == 0 and bool(row["flag"])
    assert "phi_5" in report.missing and "psi_4" not in report.missing
    assert not bool(report_table(ENCODING_SIZES, store, tolerance=0.5).frame.set_index("n").loc[4]["flag"])


def test_bounds_and_mu_tables(tmp_path):
    store = RecordStore(tmp_path)
    store.save("f3", {"kind": "oracle", "bound": "f", "n": 3, "value": "1"})
    store.save("fhat3", {"kind": "bound", "bound": "fhat", "n": 3, "value": "1/2", "exact": True})
    store.save("f4", {"kind": "bound", "bound": "f", "n": 4, "value": "3/2", "exact": False})
    store.save("mu3", {"kind": "oracle", "bound": "mu", "n": 3, "value": "2"})
    store.save("mu7", {"kind": "bound", "bound": "mu", "n": 7, "value": "30", "exact": True})
    bounds = report_table(BOUNDS, store).frame.set_index("k")
    assert not bool(bounds.loc[3]["flag"])
    assert bounds.loc[4]["f"] is None
    mu = report_table(MU, store)
    table = mu.frame.set_index("n")
    assert bool(table.loc[3]["flag"]) and not bool(table.loc[7]["flag"])
    assert "mu(2)" in mu.missing
    assert "missing records" in mu.render()
    assert mu.to_record()["table"] == MU


def test_unknown_table(tmp_path):
    with pytest.raises(ValueError):
        report_table("nu", RecordStore(tmp_path))
