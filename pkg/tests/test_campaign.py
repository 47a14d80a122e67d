import json
import threading

import pytest

from qcube.bounds import build_f
from qcube.conjectures import build_phi
from qcube.errors import ModelCheckError
from qcube.solvers.base import SolveResult, SolveStatus, check_model
from qcube.solvers.campaign import (
    CubeCampaign,
    CubeOutcome,
    aggregate_verdict,
    replay_journal,
    run_campaign,
)
from qcube.solvers.cubes import generate_cubes
from qcube.solvers.external import solve


@pytest.fixture(scope="module")
def phi3():
    return build_phi(3)


@pytest.fixture(scope="module")
def phi3_cubes(phi3):
    return generate_cubes(phi3, 3)


def journal_lines(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_unsat_campaign_with_shared_queue(phi3, phi3_cubes, internal_spec, tmp_path):
    journal = tmp_path / "run.jsonl"
    report = run_campaign(CubeCampaign(phi3, phi3_cubes, workers=2, journal=journal), internal_spec)
    assert report.verdict is SolveStatus.UNSAT
    assert report.counts() == {"UNSAT": 8}
    lines = journal_lines(journal)
    assert len(lines) == 9
    assert lines[0]["type"] == "header" and lines[0]["digest"] == phi3.digest()
    assert sorted(entry["index"] for entry in lines[1:]) == list(range(8))


def test_static_assignment(phi3, phi3_cubes, internal_spec):
    report = run_campaign(CubeCampaign(phi3, phi3_cubes, workers=3, static=True), internal_spec)
    assert report.verdict is SolveStatus.UNSAT
    assert len(report.to_record()["cube_wall_times"]) == 8


def test_sat_campaign_returns_a_model(internal_spec):
    f = build_f(2, "1")
    report = run_campaign(CubeCampaign(f, generate_cubes(f, 2), workers=2), internal_spec)
    assert report.verdict is SolveStatus.SAT
    check_model(f, report.model)


def unsat_everywhere(f, assumptions):
    return SolveResult(SolveStatus.UNSAT)


def test_failing_cube_is_retried_once(phi3, phi3_cubes, tmp_path):
    failures = {"left": 1}
    lock = threading.Lock()

    def flaky(f, assumptions):
        if tuple(assumptions) == phi3_cubes[0].literals:
            with lock:
                if failures["left"]:
                    failures["left"] -= 1
                    raise RuntimeError("solver crashed")
        return SolveResult(SolveStatus.UNSAT)

    journal = tmp_path / "run.jsonl"
    report = run_campaign(CubeCampaign(phi3, phi3_cubes, journal=journal), solve_fn=flaky)
    assert report.verdict is SolveStatus.UNSAT
    first = [e for e in journal_lines(journal)[1:] if e["index"] == 0]
    assert [(e["status"], e["attempt"]) for e in first] == [("ERROR", 1), ("UNSAT", 2)]


def test_persistent_failure_makes_the_verdict_unknown(phi3, phi3_cubes):
    def broken(f, assumptions):
        if tuple(assumptions) == phi3_cubes[1].literals:
            return SolveResult(SolveStatus.UNKNOWN)
        return SolveResult(SolveStatus.UNSAT)

    report = run_campaign(CubeCampaign(phi3, phi3_cubes), solve_fn=broken)
    assert report.verdict is SolveStatus.UNKNOWN
    assert report.outcomes[1].status == "ERROR" and report.outcomes[1].attempt == 2


def test_resume_skips_finished_cubes(phi3, phi3_cubes, internal_spec, tmp_path):
    journal = tmp_path / "run.jsonl"
    run_campaign(CubeCampaign(phi3, phi3_cubes, journal=journal), internal_spec)
    lines = journal.read_text().splitlines()
    journal.write_text("\n".join(lines[:4]) + '\n{"type": "cu')

    seen = []

    def recording(f, assumptions):
        seen.append(tuple(assumptions))
        return solve(f, internal_spec, assumptions)

    report = run_campaign(CubeCampaign(phi3, phi3_cubes, journal=journal), resume=True, solve_fn=recording)
    assert report.verdict is SolveStatus.UNSAT
    assert len(seen) == 5
    header, outcomes = replay_journal(journal)
    assert header["type"] == "header"
    assert sorted(outcomes) == list(range(8))
    assert all(o.status == "UNSAT" for o in outcomes.values())


def test_resume_retries_timed_out_cubes(phi3, phi3_cubes, tmp_path):
    journal = tmp_path / "run.jsonl"

    def slow_first_cube(f, assumptions):
        if tuple(assumptions) == phi3_cubes[0].literals:
            return SolveResult(SolveStatus.TIMEOUT)
        return SolveResult(SolveStatus.UNSAT)

    first = run_campaign(CubeCampaign(phi3, phi3_cubes, journal=journal), solve_fn=slow_first_cube)
    assert first.verdict is SolveStatus.UNKNOWN
    assert first.outcomes[0].status == "TIMEOUT"

    seen = []

    def recording(f, assumptions):
        seen.append(tuple(assumptions))
        return SolveResult(SolveStatus.UNSAT)

    campaign = CubeCampaign(phi3, phi3_cubes, journal=journal)
    report = run_campaign(campaign, resume=True, solve_fn=recording)
    assert seen == [phi3_cubes[0].literals]
    assert report.verdict is SolveStatus.UNSAT
    _, outcomes = replay_journal(journal)
    assert outcomes[0].status == "UNSAT"


def test_resume_rejects_a_different_formula(phi3, phi3_cubes, tmp_path):
    journal = tmp_path / "run.jsonl"
    run_campaign(CubeCampaign(phi3, phi3_cubes, journal=journal), solve_fn=unsat_everywhere)
    other = phi3.with_units([1])
    with pytest.raises(ValueError):
        run_campaign(CubeCampaign(other, phi3_cubes, journal=journal), resume=True, solve_fn=unsat_everywhere)


def test_bad_model_stops_the_campaign(phi3, phi3_cubes):
    def lying(f, assumptions):
        raise ModelCheckError([1, 2])

    with pytest.raises(ModelCheckError):
        run_campaign(CubeCampaign(phi3, phi3_cubes, workers=2), solve_fn=lying)


def test_replay_errors(tmp_path):
    path = tmp_path / "j.jsonl"
    path.write_text('{"type": "cube", "index": 0, "status": "UNSAT", "wall": 0.1, "attempt": 1}\n')
    with pytest.raises(ValueError):
        replay_journal(path)
    path.write_text('{"type": "header"}\nnot json\n{"type": "cube", "index": 0, "status": "SAT", "wall": 0, "attempt": 1}\n')
    with pytest.raises(ValueError):
        replay_journal(path)


def test_aggregate_verdict():
    assert aggregate_verdict([]) is SolveStatus.UNSAT
    assert aggregate_verdict([CubeOutcome(0, "UNSAT"), CubeOutcome(1, "SAT")]) is SolveStatus.SAT
    assert aggregate_verdict([CubeOutcome(0, "UNSAT"), CubeOutcome(1, "TIMEOUT")]) is SolveStatus.UNKNOWN
    assert aggregate_verdict([CubeOutcome(0, "UNSAT"), CubeOutcome(1)]) is SolveStatus.UNKNOWN


def test_campaign_validation(phi3, phi3_cubes):
    with pytest.raises(ValueError):
        CubeCampaign(phi3, phi3_cubes, workers=0)
    with pytest.raises(ValueError):
        run_campaign(CubeCampaign(phi3, phi3_cubes))
