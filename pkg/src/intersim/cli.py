"""Command-line entry point.

Subcommands: run (one episode), batch (sampled episodes, optionally paired
across all policies), calibrate (random-search weight calibration), fixtures
(replay the pinned case-study scenarios and check their signatures), serve
(human-in-the-loop session server). Exit codes: 0 ok, 1 config error,
2 episode error, 3 fixture failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bridge
from .config import ScenarioConfig, load_config
from .errors import ConfigError, IntersimError
from .game import CalibrationObjective, calibrate_weights
from .recording import (
    counts_csv,
    episodes_csv,
    fixture_series_csv,
    lagging_csv,
    trace_lines,
    write_trace,
)
from .sim import ScenarioSampler, batch_run, run_episode

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_EPISODE = 2
EXIT_FIXTURE = 3

FIXTURES = ("nosc", "rss", "sc")


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "policy", None):
        cfg = cfg.with_policy(args.policy)
    return cfg


def cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        record = run_episode(cfg)
    except IntersimError as exc:
        print(f"episode error: {exc}", file=sys.stderr)
        return EXIT_EPISODE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = out / f"trace_{cfg.policy}_{cfg.seed}.jsonl"
    write_trace(record, cfg, trace_path)
    tta = "none" if record.tta is None else f"{record.tta:.3f}"
    print(f"classification={record.classification} tta={tta} "
          f"leader={record.leader} aeb={record.aeb_fired} "
          f"bin={record.speed_bin} trace={trace_path}")
    return EXIT_OK


def cmd_batch(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sampler = ScenarioSampler(base=cfg)
    policies = ("sc", "nosc", "rss") if args.compare else (cfg.policy,)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    chash = cfg.config_hash()
    summaries = []
    try:
        for policy in policies:
            summary = batch_run(sampler, policy, args.n, cfg.seed, jobs=args.jobs)
            summaries.append(summary)
            (out / f"episodes_{policy}.csv").write_text(episodes_csv(summary, chash))
            tot = summary.totals()
            print(f"{policy}: total={tot['Total']} danger={tot['Danger']} "
                  f"fullstop={tot['FullStop']} normal={tot['Normal']} "
                  f"failed={tot['Failed']}")
    finally:
        if summaries:
            (out / "counts.csv").write_text(counts_csv(summaries, chash))
            (out / "lagging.csv").write_text(lagging_csv(summaries, chash))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sampler = ScenarioSampler(base=cfg)
    objective = CalibrationObjective()
    try:
        result = calibrate_weights(sampler, objective, budget=args.budget,
                                   seed=cfg.seed, n_candidates=args.candidates)
    except IntersimError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_EPISODE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cols = ["candidate", "beta", "gamma", "lambda", "valid", "objective",
            "danger_rate", "fullstop_rate", "mean_norm_time"]
    lines = [f"# config_hash={cfg.config_hash()}", ",".join(cols)]
    for row in result.rows:
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                              for c in cols))
    (out / "calibration.csv").write_text("\n".join(lines) + "\n")
    w = result.weights
    print(f"weights: alpha={w.alpha} beta={w.beta:.4f} gamma={w.gamma:.4f} "
          f"lambda={w.lam:.4f} (table: {out / 'calibration.csv'})")
    return EXIT_OK


def fixture_signature_errors(name: str, record) -> list[str]:
    """Qualitative signature checks for the pinned case-study scenarios."""
    errors: list[str] = []
    arrival = next((row for row in record.steps if row.get("arrival")), None)
    if arrival is None:
        return [f"{name}: no leader-arrival event"]
    if name == "nosc":
        if not record.aeb_fired:
            errors.append("nosc: AEB did not fire")
        if arrival["f"] != 0.0:
            errors.append(f"nosc: final visibility {arrival['f']} != 0 (not in blind zone)")
        if record.classification != "Danger":
            errors.append(f"nosc: classification {record.classification} != Danger")
    elif name == "rss":
        if record.classification != "Danger":
            errors.append(f"rss: classification {record.classification} != Danger")
        held_late = any(
            (row.get("decision") or {}).get("strategy") == "not_yield"
            and -row["hv"]["s"] / max(row["hv"]["v"], 1e-6) <= 4.5
            for row in record.steps if row.get("decision"))
        if not held_late:
            errors.append("rss: never held not_yield with the truck within 4.5 s of entry")
    elif name == "sc":
        if not any((row.get("decision") or {}).get("strategy") == "yield"
                   for row in record.steps):
            errors.append("sc: no deceleration (yield) decision before conflict entry")
        if arrival["f"] is None or arrival["f"] < 0.5:
            errors.append(f"sc: final visibility {arrival['f']} < 0.5")
        if record.tta is None or record.tta <= 0.83:
            errors.append(f"sc: tta {record.tta} <= 0.83")
        if record.classification != "Normal":
            errors.append(f"sc: classification {record.classification} != Normal")
    return errors


def first_divergence(lines_a: list[str], lines_b: list[str]) -> int | None:
    for i, (a, b) in enumerate(zip(lines_a, lines_b)):
        if a != b:
            return i
    if len(lines_a) != len(lines_b):
        return min(len(lines_a), len(lines_b))
    return None


def cmd_fixtures(args) -> int:
    configs_dir = Path(args.configs)
    golden_dir = configs_dir / "golden"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []
    for name in FIXTURES:
        path = configs_dir / f"fixture_{name}.yaml"
        try:
            cfg = load_config(path)
            record = run_episode(cfg)
        except IntersimError as exc:
            print(f"fixture {name}: error {exc}", file=sys.stderr)
            return EXIT_EPISODE
        errors = fixture_signature_errors(name, record)

        lines = list(trace_lines(record, cfg))
        golden_path = golden_dir / f"fixture_{name}.trace.jsonl"
        if args.update_golden:
            golden_dir.mkdir(parents=True, exist_ok=True)
            golden_path.write_text("\n".join(lines) + "\n")
        elif golden_path.exists():
            golden = golden_path.read_text().splitlines()
            div = first_divergence(lines, golden)
            if div is not None:
                errors.append(f"{name}: trace diverges from golden at line {div}")
        (out / f"fixture_{name}.csv").write_text(fixture_series_csv(record))

        status = "PASS" if not errors else "FAIL"
        tta = "none" if record.tta is None else f"{record.tta:.3f}"
        print(f"fixture {name}: {status} classification={record.classification} tta={tta}")
        for e in errors:
            print(f"  - {e}")
        failures.extend(errors)
    return EXIT_OK if not failures else EXIT_FIXTURE


def cmd_serve(args) -> int:
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"serving human-in-the-loop bridge on ws://{args.host}:{args.port} "
          f"(speed x{args.speed})")
    bridge.serve(cfg, port=args.port, host=args.host, out_dir=args.out,
                 realtime_factor=args.speed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intersim",
                                description="Two-vehicle intersection simulator "
                                            "and decision library")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one episode and write its trace")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--policy", choices=("sc", "nosc", "rss", "coast"))
    run.add_argument("--out", default="out")
    run.set_defaults(func=cmd_run)

    batch = sub.add_parser("batch", help="run sampled episodes and aggregate statistics")
    batch.add_argument("--config", required=True)
    batch.add_argument("--n", type=int, required=True)
    batch.add_argument("--seed", type=int)
    batch.add_argument("--policy", choices=("sc", "nosc", "rss", "coast"))
    batch.add_argument("--compare", action="store_true",
                       help="run all three policies on identical scenario seeds")
    batch.add_argument("--jobs", type=int, default=1)
    batch.add_argument("--out", default="out")
    batch.set_defaults(func=cmd_batch)

    cal = sub.add_parser("calibrate", help="random-search the game weights")
    cal.add_argument("--config", required=True)
    cal.add_argument("--seed", type=int)
    cal.add_argument("--budget", type=int, default=30,
                     help="episodes per candidate")
    cal.add_argument("--candidates", type=int, default=20)
    cal.add_argument("--out", default="out")
    cal.set_defaults(func=cmd_calibrate)

    fix = sub.add_parser("fixtures", help="replay pinned case studies and check signatures")
    fix.add_argument("--configs", default="configs")
    fix.add_argument("--out", default="out")
    fix.add_argument("--update-golden", action="store_true",
                     help="regenerate the golden traces instead of comparing")
    fix.set_defaults(func=cmd_fixtures)

    srv = sub.add_parser("serve", help="serve the human-in-the-loop bridge")
    srv.add_argument("--config", required=True)
    srv.add_argument("--port", type=int, default=8720)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--speed", type=float, default=1.0,
                     help="realtime factor (0 = unpaced)")
    srv.add_argument("--out", default=None,
                     help="directory for session traces and control logs")
    srv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
