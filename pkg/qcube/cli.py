"""
Command line entry point: `python main.py <subcommand> ...`.

Every subcommand prints one JSON report on stdout; it carries the run manifest.
Exit status is 0 when a verdict or value was reached, 1 on UNKNOWN, timeout or
solver failure, 2 on usage errors.
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from qcube.alternating import alternating_coloring, lower_bound_consistency
from qcube.bounds import BUILD, build_mu, compute_bound, decode_coloring
from qcube.cnf import CnfFormula, load_dimacs, save_dimacs, write_registry
from qcube.conjectures import EncodingConfig, build_encoding
from qcube.constants import (
    BOUND_KINDS,
    CONJ1,
    CONJ2,
    CONJ3,
    CONJECTURES,
    DEFAULT_CONFLICT_BUDGET,
    DEFAULT_MAX_COMP,
    DEFAULT_TIMEOUT,
    KIND_MU,
    MTOT,
    SAT_EXIT,
    SEQ,
    UNSAT_EXIT,
)
from qcube.errors import OracleLimitError, QcubeError
from qcube.geodesics import simulate
from qcube.hypercube import Coloring
from qcube.oracle import any_path_changes, change_profile, coloring_statistics, exact_sweep
from qcube.reports import KNOWN_F, KNOWN_FHAT, TABLE_KINDS, RecordStore, RunManifest, report_table
from qcube.solvers.base import SolveStatus, SolverSpec
from qcube.solvers.campaign import CubeCampaign, run_campaign
from qcube.solvers.cubes import BUILTIN, SPLITTERS, generate_cubes, load_cubes, save_cubes
from qcube.solvers.external import simplify_external, solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNKNOWN = 1
EXIT_USAGE = 2

COUNTEREXAMPLE = "COUNTEREXAMPLE"
SPURIOUS_SAT = "SPURIOUS_SAT"
DIRECT = "direct"
CAMPAIGN = "campaign"


def is_counterexample(target: int, c: Coloring) -> bool:
    """Whether `c` really violates conjecture `target`, decided by the oracle."""
    if target in (CONJ1, CONJ2):
        if not c.is_antipodal():
            return False
        s = any_path_changes(c) if target == CONJ1 else change_profile(c).s
        return bool((s > 0).all())
    s = any_path_changes(c) if target == CONJ3 else change_profile(c).s
    return bool((s >= 2).all())


def verify(
    target: int,
    n: int,
    spec: SolverSpec,
    mode: str = DIRECT,
    cfg: Optional[EncodingConfig] = None,
    depth: int = 8,
    workers: int = 1,
    journal: Optional[Path] = None,
) -> Dict[str, object]:
    """
    Decide conjecture `target` on Q_n.

    UNSAT confirms the conjecture. A SAT model is decoded and checked by the
    oracle: a real violation is reported as COUNTEREXAMPLE, anything else as
    SPURIOUS_SAT and never as a counterexample.
    """
    cfg = (cfg or EncodingConfig()).with_(target=target)
    f = build_encoding(n, cfg)
    report: Dict[str, object] = {
        "kind": "verify",
        "conjecture": target,
        "n": n,
        "mode": mode,
        "variables": f.num_vars,
        "clauses": f.num_clauses,
        "digest": f.digest(),
    }
    if mode == DIRECT:
        result = solve(f, spec)
        status, model = result.status, result.model
        report["wall_time"] = result.wall_time
    elif mode == CAMPAIGN:
        cubes = generate_cubes(f, depth)
        campaign = CubeCampaign(f, cubes, workers, journal)
        outcome = run_campaign(campaign, spec, resume=journal is not None)
        status, model = outcome.verdict, outcome.model
        report.update(campaign=outcome.to_record())
    else:
        raise ValueError(f"unknown mode {mode!r}")
    verdict = status.value
    if status is SolveStatus.SAT:
        c = decode_coloring(f, model, n)
        verdict = COUNTEREXAMPLE if is_counterexample(target, c) else SPURIOUS_SAT
        report["coloring"] = c.dumps()
        if verdict == SPURIOUS_SAT:
            logger.warning("conjecture %d, n=%d: SAT model is not a counterexample", target, n)
    report["verdict"] = verdict
    logger.info("conjecture %d on Q_%d: %s", target, n, verdict)
    return report


def _encoding_config(args: argparse.Namespace, target: int = CONJ1) -> EncodingConfig:
    return EncodingConfig(
        target=target,
        symmetry_breaking=not args.no_symmetry_breaking,
        max_comp=args.max_comp,
        red_degree_constraint=not args.no_red_degree,
        all_sources=args.all_sources,
        include_flips_only=args.include_flips_only,
        cardinality=args.cardinality,
    )


def _solver_spec(args: argparse.Namespace) -> SolverSpec:
    overrides = {
        "timeout": args.timeout,
        "sat_exit_code": args.sat_exit,
        "unsat_exit_code": args.unsat_exit,
        "conflict_budget": args.budget,
    }
    if args.solver_cmd:
        return SolverSpec.from_command(args.solver_cmd, name="custom", **overrides)
    return SolverSpec.preset(args.solver, **overrides)


def _emit(report: Dict[str, object], manifest: RunManifest, args: argparse.Namespace) -> None:
    manifest.finish()
    report["manifest"] = manifest.to_record()
    if args.manifest:
        manifest.write(args.manifest)
    print(json.dumps(report, indent=2, default=str))


def _store(args: argparse.Namespace) -> Optional[RecordStore]:
    return RecordStore(args.store) if args.store else None


def _status_exit(status: str) -> int:
    return EXIT_OK if status in (SolveStatus.SAT.value, SolveStatus.UNSAT.value, COUNTEREXAMPLE) else EXIT_UNKNOWN


def cmd_encode(args: argparse.Namespace, manifest: RunManifest) -> int:
    cfg = _encoding_config(args, args.conj)
    f = build_encoding(args.n, cfg)
    save_dimacs(f, args.out)
    manifest.add_output(args.out)
    if args.registry:
        with open(args.registry, "w") as sink:
            write_registry(f, sink)
        manifest.add_output(args.registry)
    report = {
        "kind": "encoding",
        "target": args.conj,
        "n": args.n,
        "variables": f.num_vars,
        "clauses": f.num_clauses,
        "digest": f.digest(),
        "config": vars(cfg),
    }
    store = _store(args)
    if store:
        store.save(f"encoding-conj{args.conj}-n{args.n}", report)
    _emit(report, manifest, args)
    return EXIT_OK


def _bound_formula(args: argparse.Namespace) -> CnfFormula:
    cfg = _encoding_config(args).with_(
        symmetry_breaking=args.symmetry_breaking, red_degree_constraint=args.red_degree
    )
    if args.kind == KIND_MU:
        if args.target is None:
            raise ValueError("mu needs --target")
        return build_mu(args.n, args.target, cfg)
    if args.alpha is None:
        raise ValueError(f"{args.kind} needs --alpha")
    return BUILD[args.kind](args.n, args.alpha, cfg)


def cmd_bound(args: argparse.Namespace, manifest: RunManifest) -> int:
    f = _bound_formula(args)
    save_dimacs(f, args.out)
    manifest.add_output(args.out)
    report = {**f.meta, "kind": "bound-encoding", "bound": f.meta["kind"], "variables": f.num_vars, "clauses": f.num_clauses}
    _emit(report, manifest, args)
    return EXIT_OK


def cmd_bound_search(args: argparse.Namespace, manifest: RunManifest) -> int:
    spec = _solver_spec(args)
    cfg = _encoding_config(args).with_(
        symmetry_breaking=args.symmetry_breaking, red_degree_constraint=args.red_degree
    )
    result = compute_bound(args.kind, args.n, lambda f: solve(f, spec), cfg)
    report = result.to_record()
    store = _store(args)
    if store:
        store.save(f"bound-{args.kind}-n{args.n}", report)
    _emit(report, manifest, args)
    return EXIT_OK if result.exact else EXIT_UNKNOWN


def cmd_oracle(args: argparse.Namespace, manifest: RunManifest) -> int:
    if args.coloring:
        c = Coloring.load(args.coloring)
        manifest.add_input(args.coloring)
        stats = coloring_statistics(c)
        report: Dict[str, object] = {
            "kind": "coloring",
            "n": c.dim,
            "f": str(stats.f),
            "fhat": str(stats.fhat),
            "mu": stats.mu,
            "antipodal": c.is_antipodal(),
        }
    else:
        sweep = exact_sweep(args.kind, args.n, long_run=args.long_run)
        report = sweep.to_record()
        store = _store(args)
        if store:
            store.save(f"oracle-{args.kind}-n{args.n}", report)
    _emit(report, manifest, args)
    return EXIT_OK


def _simulation_colorings(args: argparse.Namespace) -> List[Coloring]:
    if args.coloring == "alternating":
        return [alternating_coloring(args.n)]
    if args.coloring == "random":
        rng = np.random.default_rng(args.seed)
        return [Coloring.random(args.n, rng) for _ in range(args.colorings)]
    return [Coloring.load(args.coloring)]


def cmd_simulate(args: argparse.Namespace, manifest: RunManifest) -> int:
    fhat_k = Fraction(args.fhat) if args.fhat else KNOWN_FHAT.get(args.k)
    if fhat_k is None:
        raise ValueError(f"no known f-hat({args.k}); pass --fhat")
    refined = KNOWN_FHAT.get(args.n % args.k) if args.refined_remainder else None
    runs = [
        simulate(c, args.k, args.trials, args.seed, fhat_k, args.workers, args.optimize_remainder, refined)
        for c in _simulation_colorings(args)
    ]
    report: Dict[str, object] = {
        "kind": "simulation",
        "n": args.n,
        "k": args.k,
        "coloring": args.coloring,
        "runs": [r.to_record() for r in runs],
        "pass": all(r.passed for r in runs),
        "lower_bounds": [row.to_record() for row in lower_bound_consistency(KNOWN_F)],
    }
    store = _store(args)
    if store:
        store.save(f"simulation-n{args.n}-k{args.k}-seed{args.seed}", report)
    _emit(report, manifest, args)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, manifest: RunManifest) -> int:
    f = load_dimacs(args.cnf)
    manifest.add_input(args.cnf)
    result = solve(f, _solver_spec(args))
    report: Dict[str, object] = {"kind": "solve", **result.to_record()}
    if result.is_sat and args.model:
        Path(args.model).write_text("v " + " ".join(map(str, result.model)) + " 0\n")
        manifest.add_output(args.model)
    _emit(report, manifest, args)
    return _status_exit(result.status.value)


def cmd_cube(args: argparse.Namespace, manifest: RunManifest) -> int:
    f = load_dimacs(args.cnf)
    manifest.add_input(args.cnf)
    report: Dict[str, object] = {"kind": "cube", "depth": args.depth, "splitter": args.splitter}
    if args.simplify:
        simplified = simplify_external(f, _solver_spec(args))
        report["simplify"] = simplified.status.value
        if simplified.formula is None:
            _emit(report, manifest, args)
            return _status_exit(simplified.status.value)
        f = simplified.formula
        save_dimacs(f, args.simplified_out)
        manifest.add_output(args.simplified_out)
    cubes = generate_cubes(f, args.depth, args.splitter, args.tool, args.timeout)
    save_cubes(cubes, args.out)
    manifest.add_output(args.out)
    report["cubes"] = len(cubes)
    _emit(report, manifest, args)
    return EXIT_OK


def cmd_campaign(args: argparse.Namespace, manifest: RunManifest) -> int:
    f = load_dimacs(args.cnf)
    manifest.add_input(args.cnf)
    manifest.add_input(args.cubes)
    campaign = CubeCampaign(
        f, load_cubes(args.cubes), args.workers, args.journal, args.static, formula_path=str(args.cnf)
    )
    outcome = run_campaign(campaign, _solver_spec(args), resume=args.resume)
    report = outcome.to_record()
    store = _store(args)
    if store:
        store.save(f"campaign-{f.digest()[:12]}", report)
    _emit(report, manifest, args)
    return _status_exit(outcome.verdict.value)


def cmd_verify(args: argparse.Namespace, manifest: RunManifest) -> int:
    report = verify(
        args.conj,
        args.n,
        _solver_spec(args),
        args.mode,
        _encoding_config(args, args.conj),
        args.depth,
        args.workers,
        args.journal,
    )
    store = _store(args)
    if store:
        store.save(f"verify-conj{args.conj}-n{args.n}", report)
    _emit(report, manifest, args)
    return _status_exit(str(report["verdict"]))


def cmd_report(args: argparse.Namespace, manifest: RunManifest) -> int:
    table = report_table(args.table, RecordStore(args.store or "records"), args.tolerance)
    logger.info("\n%s", table.render())
    _emit(table.to_record(), manifest, args)
    return EXIT_OK


def _add_encoding_options(p: argparse.ArgumentParser, sb_default: bool = True) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-comp", type=int, default=DEFAULT_MAX_COMP)
    p.add_argument("--all-sources", action="store_true")
    p.add_argument("--include-flips-only", action="store_true")
    p.add_argument("--cardinality", choices=(MTOT, SEQ), default=MTOT)
    if sb_default:
        p.add_argument("--no-symmetry-breaking", action="store_true")
        p.add_argument("--no-red-degree", action="store_true")
    else:
        p.set_defaults(no_symmetry_breaking=False, no_red_degree=False)
        p.add_argument("--symmetry-breaking", action="store_true")
        p.add_argument("--red-degree", action="store_true")


def _add_solver_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", default="internal", help="preset: internal, pysat, kissat, cadical")
    p.add_argument("--solver-cmd", help="command template with a {formula} placeholder")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    p.add_argument("--sat-exit", type=int, default=SAT_EXIT)
    p.add_argument("--unsat-exit", type=int, default=UNSAT_EXIT)
    p.add_argument("--budget", type=int, default=DEFAULT_CONFLICT_BUDGET, help="internal solver conflict limit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcube", description="SAT toolkit for hypercube edge colorings")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--manifest", help="also write the run manifest to this file")
    parser.add_argument("--store", help="record directory for report tables")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write a conjecture encoding as DIMACS")
    p.add_argument("--conj", type=int, choices=CONJECTURES, default=CONJ1)
    _add_encoding_options(p)
    p.add_argument("--out", required=True)
    p.add_argument("--registry", help="sidecar file mapping variable names to indices")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("bound", help="write a bound encoding F, F-hat or M as DIMACS")
    p.add_argument("--kind", choices=BOUND_KINDS, required=True)
    p.add_argument("--alpha", help="threshold as p/q or decimal (f, fhat)")
    p.add_argument("--target", type=int, help="blocking pairs (mu)")
    _add_encoding_options(p, sb_default=False)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("bound-search", help="exact f, f-hat or mu by binary search")
    p.add_argument("--kind", choices=BOUND_KINDS, required=True)
    _add_encoding_options(p, sb_default=False)
    _add_solver_options(p)
    p.set_defaults(handler=cmd_bound_search)

    p = sub.add_parser("oracle", help="exhaustive sweep or statistics of one coloring")
    p.add_argument("--kind", choices=BOUND_KINDS, default="f")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--long-run", action="store_true")
    p.add_argument("--coloring", help="coloring file to evaluate instead of sweeping")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("simulate", help="Monte Carlo run of the chunked geodesic algorithm")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--coloring", default="alternating", help="alternating, random or a coloring file")
    p.add_argument("--colorings", type=int, default=100, help="how many random colorings")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--fhat", help="f-hat(k) when it is not tabulated")
    p.add_argument("--optimize-remainder", action="store_true")
    p.add_argument("--refined-remainder", action="store_true")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("solve", help="solve a DIMACS file")
    p.add_argument("--cnf", required=True)
    p.add_argument("--model", help="write the model here when SAT")
    _add_solver_options(p)
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("cube", help="split a DIMACS file into cubes")
    p.add_argument("--cnf", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--splitter", choices=SPLITTERS, default=BUILTIN)
    p.add_argument("--tool", help="cube tool executable for the march splitter")
    p.add_argument("--out", required=True)
    p.add_argument("--simplify", action="store_true", help="run the solver's simplification first")
    p.add_argument("--simplified-out", default="simplified.cnf")
    _add_solver_options(p)
    p.set_defaults(handler=cmd_cube)

    p = sub.add_parser("campaign", help="solve every cube of a cube file")
    p.add_argument("--cnf", required=True)
    p.add_argument("--cubes", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--journal", type=Path)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--static", action="store_true", help="cube i goes to worker i mod W")
    _add_solver_options(p)
    p.set_defaults(handler=cmd_campaign)

    p = sub.add_parser("verify", help="decide a conjecture on Q_n")
    p.add_argument("--conj", type=int, choices=CONJECTURES, default=CONJ1)
    _add_encoding_options(p)
    p.add_argument("--mode", choices=(DIRECT, CAMPAIGN), default=DIRECT)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--journal", type=Path)
    _add_solver_options(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("report", help="measured values next to the published tables")
    p.add_argument("--table", choices=TABLE_KINDS, required=True)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    params = {k: v for k, v in vars(args).items() if k != "handler"}
    manifest = RunManifest.start(args.command, params, seed=getattr(args, "seed", None))
    try:
        return args.handler(args, manifest)
    except (ValueError, OracleLimitError) as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except QcubeError as exc:
        logger.error("%s", exc)
        return EXIT_UNKNOWN
