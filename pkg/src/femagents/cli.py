"""Command-line entry point: run, bench, oracle, report, replay."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .transcript import transcript_hash

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_file(path) if path else ExperimentConfig()


def cmd_run(args) -> int:
    from .harness import run_trial

    cfg = _load_config(args.config)
    combo = args.combo.replace(",", "+")
    overrides = {"combinations": [combo], "n_runs": 1}
    if args.query:
        overrides["query"] = args.query
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.level:
        overrides["level"] = args.level
    if args.backend:
        cfg.backend.kind = args.backend
    cfg = ExperimentConfig(**{**cfg.__dict__, **overrides})
    rec = run_trial(combo, cfg, 0, args.out)
    print(f"{rec.combination}  planner_software={rec.planner_software}  transcript={rec.transcript}")
    for s in rec.steps:
        mark = "ok  " if s.success else "FAIL"
        print(f"  step {s.step} {s.scenario:<18} {mark} L0={s.l0_executed} L1={s.l1_artifact} "
              f"L2={s.l2_verified} end={s.termination} exec={s.executor_attempts} {s.reason}")
    return 0


def cmd_bench(args) -> int:
    from .harness import run_matrix

    cfg = ExperimentConfig.from_file(args.config)
    if args.parallelism:
        cfg.parallelism = args.parallelism
    records = run_matrix(cfg, args.out)
    print(f"{len(records)} trials; results in {Path(args.out) / 'results.csv'}")
    return 0


def cmd_oracle_solve(args) -> int:
    from .fem import Material, solve_step, write_field

    mat = Material(args.E, args.nu, args.formulation)
    u, sxy = solve_step(args.step, args.n, mat, args.shear_y_only)
    write_field(u, args.out)
    print(f"wrote {args.out} ({len(u.points)} nodes)")
    if sxy is not None:
        path = args.stress_out or str(Path(args.out).with_name(Path(args.out).stem + "_sxy.txt"))
        write_field(sxy, path)
        print(f"wrote {path}")
    return 0


def cmd_oracle_compare(args) -> int:
    from .fem import compare_fields, hole_mask

    exclude = None
    if args.hole:
        cx, cy, r = (float(v) for v in args.hole.split(","))
        exclude = hole_mask((cx, cy), r)
    err = compare_fields(args.a, args.b, args.probe, exclude=exclude)
    print(f"{err:.6e}")
    return 0


def cmd_report(args) -> int:
    from .harness import read_records, summarize
    from .report import emit_report
    from .stats import aggregate

    src = Path(getattr(args, "in"))
    records = read_records(src / "records.jsonl")
    order = list(dict.fromkeys(r.combination for r in records))
    summaries = aggregate(records, software_filter=args.filter, combinations=order) if args.filter \
        else summarize(records, order)
    paths = emit_report(summaries, args.out or src)
    for p in paths:
        print(p)
    return 0


def cmd_replay(args) -> int:
    from .replay import replay_transcript
    from .transcript import read_transcript

    original = read_transcript(args.transcript)
    again = replay_transcript(original, args.combo.replace(",", "+") if args.combo else None)
    same = original.same_messages(again)
    print(f"original {transcript_hash(original)}")
    print(f"replayed {transcript_hash(again)}")
    print("identical" if same else "DIFFERENT")
    return 0 if same else RUNTIME_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="femagents", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="one four-step conversation")
    r.add_argument("--combo", required=True, help="e.g. Eng,Exe,Exp1")
    r.add_argument("--query", choices=["q1", "q2_planner"])
    r.add_argument("--out", required=True)
    r.add_argument("--config")
    r.add_argument("--seed", type=int)
    r.add_argument("--level", choices=["L0", "L1", "L2"])
    r.add_argument("--backend", choices=["http", "scripted", "replay", "record"])
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="full combination matrix")
    b.add_argument("--config", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--parallelism", type=int)
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="reference solver")
    osub = o.add_subparsers(dest="oracle_command", required=True, parser_class=_Parser)
    s = osub.add_parser("solve")
    s.add_argument("--step", type=int, required=True, choices=[1, 2, 3, 4])
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--out", required=True)
    s.add_argument("--stress-out")
    s.add_argument("--E", type=float, default=1e9)
    s.add_argument("--nu", type=float, default=0.3)
    s.add_argument("--formulation", choices=["plane_strain", "plane_stress"], default="plane_strain")
    s.add_argument("--shear-y-only", action="store_true")
    s.set_defaults(func=cmd_oracle_solve)
    c = osub.add_parser("compare")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--probe", type=int, default=21)
    c.add_argument("--hole", help="cx,cy,r of a region to skip")
    c.set_defaults(func=cmd_oracle_compare)

    rep = sub.add_parser("report", help="CSV and charts from records.jsonl")
    rep.add_argument("--in", required=True)
    rep.add_argument("--filter", choices=["fenics", "abaqus", "other"])
    rep.add_argument("--out")
    rep.set_defaults(func=cmd_report)

    rp = sub.add_parser("replay", help="re-drive a saved transcript.jsonl")
    rp.add_argument("--transcript", required=True)
    rp.add_argument("--combo")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"femagents: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, KeyError) as exc:
        print(f"femagents: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001
        print(f"femagents: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
