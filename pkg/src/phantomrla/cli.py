"""Command-line entry points.

    validate   check a manifest (and optionally machine records) for problems
    plan       sample-size planning from contests and the sampling bound
    session    run a live audit as an interactive prompt loop
    replay     verify a session log and report the replayed final state
    simulate   Monte Carlo runs: dominance and risk reports as JSON
    serve      start the HTTP service

Contests are supplied as a JSON file: a list of objects with contest_id,
candidates, winners, reported_tallies, and optional k_seats.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import comparison as cmp
from .contest import (
    contest_from_json,
    interpretation_from_json,
    smallest_margin_across,
)
from .cvr import CvrError, parse_cvr_path
from .logchain import LogCorrupt
from .manifest import ManifestError, parse_manifest
from .sampling import AuditSeed
from .scenario import BallotCounts, Proceed, classify, decision_to_json
from .session import (
    AuditConfig,
    AuditMethod,
    Evaluation,
    Found,
    NotFound,
    SessionError,
    SessionStatus,
    replay,
    start_session,
)
from .simulator import (
    BallotManifest,
    SimulatorError,
    dominance_check,
    flip_outcome,
    make_population,
    perturb_manifest,
    risk_estimate,
    run_replicates,
)


def _load_contests(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError("contests file must hold a JSON list")
    return tuple(contest_from_json(obj) for obj in data)


def _cmd_validate(args) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = parse_manifest(fh.read())
    except (ManifestError, OSError) as exc:
        print(f"manifest: INVALID: {exc}", file=sys.stderr)
        return 1
    print(f"manifest: ok, {len(manifest.groups)} groups, {manifest.total_listed} ballots listed")
    if args.cvr:
        try:
            cvr = parse_cvr_path(args.cvr)
        except (CvrError, OSError) as exc:
            print(f"cvr: INVALID: {exc}", file=sys.stderr)
            return 1
        listed = {g.group_id for g in manifest.groups}
        stray = sorted({gid for gid, _ in cvr.records if gid not in listed})
        print(f"cvr: ok, {len(cvr)} machine records")
        if stray:
            print(f"cvr: warning: records for unlisted groups: {', '.join(stray)}")
    if args.contests:
        contests = _load_contests(args.contests)
        margin = smallest_margin_across(list(contests))
        print(f"contests: ok, smallest pairwise margin {margin} votes")
    return 0


def _cmd_plan(args) -> int:
    contests = _load_contests(args.contests)
    counts = BallotCounts(
        n_manifest=args.n_manifest, n_upper=args.n_upper, n_oracle=args.n_oracle
    )
    decision = classify(counts, smallest_margin_across(list(contests)))
    print(json.dumps(decision_to_json(decision), indent=2))
    if not isinstance(decision, Proceed):
        return 1
    params = cmp.ComparisonParams.from_contests(
        list(contests), decision.sampling_upper_bound, gamma=args.gamma
    )
    n0 = cmp.initial_sample_size(params, args.alpha)
    print(
        json.dumps(
            {
                "diluted_margin": params.diluted_margin,
                "gamma": params.gamma,
                "u_factor": params.u_factor,
                "alpha": args.alpha,
                "initial_sample_size_comparison": n0,
            },
            indent=2,
        )
    )
    return 0


def _build_config(args) -> AuditConfig:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = parse_manifest(fh.read())
    contests = _load_contests(args.contests)
    method = AuditMethod(args.method)
    cvr = None
    if method is AuditMethod.COMPARISON:
        if not args.cvr:
            raise SessionError("comparison audits need --cvr")
        cvr = parse_cvr_path(args.cvr, strict=args.cvr_strict)
    counts = BallotCounts(
        n_manifest=manifest.total_listed, n_upper=args.n_upper, n_oracle=args.n_oracle
    )
    return AuditConfig(
        method=method,
        manifest=manifest,
        contests=contests,
        counts=counts,
        alpha=args.alpha,
        seed=AuditSeed.from_hex(args.seed, origin_note="cli"),
        gamma=args.gamma if method is AuditMethod.COMPARISON else None,
        escalation_cap=args.cap,
        acknowledge_margin_risk=args.acknowledge_margin_risk,
        cvr=cvr,
    )


_SESSION_HELP = """commands:
  draw                 issue the next draw
  found <json>         resolve the pending draw; json like {"contests": {"mayor": {"votes": ["a"]}}}
  notfound [note]      report the pending ballot as unfindable (irreversible)
  eval                 stop / continue / escalate check
  state                show the session state
  quit                 exit (the log written so far remains valid)
"""


def _cmd_session(args) -> int:
    config = _build_config(args)
    session = start_session(config)
    log_fh = None
    if args.log:
        log_fh = open(args.log, "w", encoding="utf-8")

        def write_record(_record, fh=log_fh):
            lines = session.log_lines()
            fh.seek(0)
            fh.truncate()
            fh.write("\n".join(lines) + "\n")
            fh.flush()

        session.on_record = write_record
        write_record(None)
    warning = session.decision.margin_warning
    print(f"session started: {config.method.value}, alpha {config.alpha}")
    print(
        f"sampling 1..{session.sampling_upper_bound}"
        f" ({session.decision.phantom_count} phantom ballots)"
    )
    if warning.outcome_at_risk:
        print(
            f"WARNING: {warning.missing_ballots} unaccounted-for ballots meet or"
            f" exceed the smallest margin ({warning.smallest_pairwise_margin_votes});"
            " acknowledged by configuration"
        )
    print(_SESSION_HELP)
    try:
        while True:
            try:
                line = input("audit> ").strip()
            except EOFError:
                break
            if not line:
                continue
            cmd, _, rest = line.partition(" ")
            try:
                if cmd == "draw":
                    result = session.next_draw()
                    if result.auto_resolved:
                        print(
                            f"draw {result.draw_number}: beyond the listing --"
                            f" phantom, worst case applied; P = {result.p_value:.6g}"
                        )
                    else:
                        loc = result.location
                        print(
                            f"draw {result.draw_number}: retrieve ballot"
                            f" {loc.index_within_group} of group {loc.group_id}"
                            f" (group #{loc.group_ordinal})"
                        )
                elif cmd == "found":
                    interp = interpretation_from_json(json.loads(rest))
                    session.record_interpretation(Found(ballot=interp))
                    print(f"recorded; P = {session.p_value():.6g}")
                elif cmd == "notfound":
                    session.record_interpretation(NotFound(note=rest or None))
                    print(f"worst case applied; P = {session.p_value():.6g}")
                elif cmd == "eval":
                    outcome = session.evaluate()
                    print(f"{outcome.value}; P = {session.p_value():.6g}")
                    if outcome is not Evaluation.CONTINUE_SAMPLING:
                        break
                elif cmd == "state":
                    print(json.dumps(session.state_json(), indent=2))
                elif cmd in ("quit", "exit"):
                    break
                else:
                    print(_SESSION_HELP)
            except (SessionError, ValueError) as exc:
                print(f"error: {exc}", file=sys.stderr)
    finally:
        if log_fh is not None:
            log_fh.close()
    print(f"final status: {session.status.value}, P = {session.p_value():.6g}")
    return 0


def _cmd_replay(args) -> int:
    try:
        with open(args.log, "r", encoding="utf-8") as fh:
            session = replay(fh.read().splitlines())
    except (LogCorrupt, SessionError, OSError) as exc:
        print(f"replay: FAILED: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print("replay: ok, every logged draw, update, and decision verified")
    print(json.dumps(session.state_json(), indent=2))
    return 0


def _cmd_simulate(args) -> int:
    margin_votes = round(args.population * args.margin)
    undervotes = round(args.population * args.undervote_rate)
    valid = args.population - undervotes
    tally_a = (valid + margin_votes) // 2
    tally_b = valid - tally_a
    if tally_a <= tally_b:
        raise SimulatorError("margin too small for this population")
    pop = make_population(
        candidates=["alpha", "bravo"],
        true_tallies={"alpha": tally_a, "bravo": tally_b},
        n_true=args.population,
        n_groups=args.groups,
        misread_rate=args.misread_rate,
        rng_seed=args.rng_seed,
    )
    report: dict = {
        "population": args.population,
        "margin_votes": margin_votes,
        "reported_tallies": pop.contest.reported_tallies,
        "method": args.method,
        "alpha": args.alpha,
        "replicates": args.replicates,
    }
    if args.wrong_outcome:
        pop, swap = flip_outcome(pop, rng_seed=args.rng_seed + 1)
        report["wrong_outcome_construction"] = swap

    error_model = {
        "n_graves": args.graves,
        "n_hellmouths": args.hellmouths,
        "n_omitted": args.omit,
        "magnitude": args.magnitude,
    }
    report["error_model"] = error_model
    erroneous: BallotManifest = perturb_manifest(
        pop.true_group_counts, error_model, rng_seed=args.rng_seed + 2
    )
    err_pop = pop.with_manifest(erroneous)
    n_m = erroneous.total_listed
    n_upper = args.n_upper if args.n_upper is not None else pop.n_true
    counts_err = BallotCounts(n_manifest=n_m, n_upper=n_upper, n_oracle=args.n_oracle)
    counts_truth = BallotCounts(
        n_manifest=pop.n_true, n_upper=pop.n_true, n_oracle=pop.n_true
    )
    seed = AuditSeed.from_hex(args.seed, origin_note="simulate")

    mode: dict = {}
    if args.fixed_n is not None:
        mode = {"fixed_n": args.fixed_n}
    else:
        mode = {"escalation_cap": args.cap}
    gamma = args.gamma if args.method == "comparison" else None
    records_err = run_replicates(
        err_pop, args.method, args.alpha, counts_err, args.replicates, seed,
        gamma=gamma, **mode,
    )
    records_truth = run_replicates(
        pop.with_accurate_manifest(), args.method, args.alpha, counts_truth,
        args.replicates, seed, gamma=gamma, **mode,
    )

    def summarize(records):
        if not records:
            return {"replicates": 0}
        ps = sorted(r.final_p for r in records)
        mid = len(ps) // 2
        return {
            "replicates": len(records),
            "mean_p": sum(ps) / len(ps),
            "median_p": ps[mid],
            "stopped": sum(1 for r in records if r.stopped_without_full_count),
            "mean_draws": sum(r.draws_used for r in records) / len(records),
        }

    report["erroneous_manifest_arm"] = summarize(records_err)
    report["accurate_manifest_arm"] = summarize(records_truth)

    if args.fixed_n is not None and records_err:
        dom = dominance_check(
            [r.final_p for r in records_err],
            [r.final_p for r in records_truth],
            confidence=args.confidence,
        )
        report["dominance"] = {
            "max_cdf_violation": dom.max_cdf_violation,
            "dkw_epsilon": dom.dkw_epsilon,
            "dominates": dom.dominates,
        }
    if args.wrong_outcome and records_err:
        risk = risk_estimate(err_pop, records_err)
        report["risk"] = {
            "empirical_risk": risk.empirical_risk,
            "standard_error": risk.standard_error,
            "wrongly_confirmed": risk.wrongly_confirmed,
        }

    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["arm", "replicate", "final_p", "stopped", "draws_used"])
            for arm, records in (
                ("erroneous", records_err),
                ("accurate", records_truth),
            ):
                for i, r in enumerate(records):
                    writer.writerow(
                        [arm, i, repr(r.final_p), int(r.stopped_without_full_count), r.draws_used]
                    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(
        create_app(frontend_dir=args.frontend),
        host=args.host,
        port=args.port,
        log_level="warning",
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phantomrla",
        description="Risk-limiting election audits that survive erroneous ballot manifests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check audit inputs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--cvr")
    p.add_argument("--contests")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("plan", help="sample-size planning")
    p.add_argument("--contests", required=True)
    p.add_argument("--n-manifest", type=int, required=True)
    p.add_argument("--n-upper", type=int, required=True)
    p.add_argument("--n-oracle", type=int)
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--gamma", type=float, default=cmp.DEFAULT_GAMMA)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("session", help="interactive audit session")
    p.add_argument("--method", choices=["comparison", "polling"], required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--contests", required=True)
    p.add_argument("--cvr")
    p.add_argument("--cvr-strict", action="store_true")
    p.add_argument("--n-upper", type=int, required=True)
    p.add_argument("--n-oracle", type=int)
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--seed", required=True, help="audit seed as hex text")
    p.add_argument("--cap", type=int, help="escalation cap in draws")
    p.add_argument("--acknowledge-margin-risk", action="store_true")
    p.add_argument("--log", help="session log path (JSON Lines)")
    p.set_defaults(func=_cmd_session)

    p = sub.add_parser("replay", help="verify a session log")
    p.add_argument("--log", required=True)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("simulate", help="Monte Carlo dominance and risk runs")
    p.add_argument("--population", type=int, default=10_000)
    p.add_argument("--margin", type=float, default=0.05, help="margin as a fraction")
    p.add_argument("--undervote-rate", type=float, default=0.02)
    p.add_argument("--groups", type=int, default=100)
    p.add_argument("--misread-rate", type=float, default=0.002)
    p.add_argument("--method", choices=["comparison", "polling"], default="comparison")
    p.add_argument("--alpha", type=float, default=0.10)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--seed", default="0ddba11", help="master seed as hex text")
    p.add_argument("--rng-seed", type=int, default=7, help="population build seed")
    p.add_argument("--graves", type=int, default=0)
    p.add_argument("--hellmouths", type=int, default=0)
    p.add_argument("--omit", type=int, default=0)
    p.add_argument("--magnitude", type=int, default=0)
    p.add_argument("--n-upper", type=int, default=None)
    p.add_argument("--n-oracle", type=int, default=None)
    p.add_argument("--wrong-outcome", action="store_true")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--fixed-n", type=int, default=None)
    group.add_argument("--cap", type=int, default=None)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="write per-replicate records as CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8630)
    p.add_argument("--frontend", help="static console build to serve at /")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.fixed_n is None and args.cap is None:
        args.fixed_n = 200
    try:
        return args.func(args)
    except (SessionError, SimulatorError, ManifestError, CvrError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
