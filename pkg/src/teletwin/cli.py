"""Command-line entry points: schedule, register, trial, experiment, serve."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from pathlib import Path

from .channel import ChannelParams, generate_schedule, schedule_to_csv
from .config import DEFAULT_BIND, load_session_config, load_trial_config
from .controller import StrategyKind
from .geometry import Vec3
from .harness import TrialConfig, run_experiment, run_trial, write_report
from .registration import PointPairSet, register_paired_points


def _add_schedule(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("schedule", help="sample a link schedule and dump it as CSV")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=float, required=True, help="seconds")
    p.add_argument("--mean-up", type=float, default=3.2)
    p.add_argument("--std-up", type=float, default=0.15)
    p.add_argument("--mean-down", type=float, default=0.8)
    p.add_argument("--std-down", type=float, default=0.1)
    p.add_argument("--min-period", type=float, default=0.05)
    p.add_argument("--out", type=Path, default=None, help="write CSV here instead of stdout")


def _run_schedule(args: argparse.Namespace) -> int:
    params = ChannelParams(
        mean_up=args.mean_up,
        std_up=args.std_up,
        mean_down=args.mean_down,
        std_down=args.std_down,
        min_period=args.min_period,
    )
    csv_text = schedule_to_csv(generate_schedule(params, args.horizon, args.seed))
    if args.out:
        args.out.write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def _add_register(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("register", help="rigid fit from a point-pair CSV (mx,my,mz,rx,ry,rz)")
    p.add_argument("--pairs", type=Path, required=True)


def _run_register(args: argparse.Namespace) -> int:
    model: list[Vec3] = []
    robot: list[Vec3] = []
    with open(args.pairs) as fh:
        header = fh.readline().strip()
        if header.replace(" ", "") != "mx,my,mz,rx,ry,rz":
            print(f"error: expected header 'mx,my,mz,rx,ry,rz', got '{header}'", file=sys.stderr)
            return 2
        for line in fh:
            if not line.strip():
                continue
            mx, my, mz, rx, ry, rz = (float(v) for v in line.split(","))
            model.append(Vec3(mx, my, mz))
            robot.append(Vec3(rx, ry, rz))
    result = register_paired_points(PointPairSet(tuple(model), tuple(robot)))
    rot = result.transform.rotation
    out = {
        "from_frame": result.transform.from_frame,
        "to_frame": result.transform.to_frame,
        "rotation": {"w": rot.w, "x": rot.x, "y": rot.y, "z": rot.z},
        "translation": {
            "x": result.transform.translation.x,
            "y": result.transform.translation.y,
            "z": result.transform.translation.z,
        },
        "fre_rms": result.fre_rms,
        "pairs": len(model),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def _add_trial(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("trial", help="run one trial and print its metrics as JSON")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--strategy", choices=["baseline", "replay"], default=None)


def _run_trial_cmd(args: argparse.Namespace) -> int:
    from dataclasses import asdict, replace

    cfg = load_trial_config(args.config) if args.config else TrialConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.strategy is not None:
        cfg = replace(cfg, strategy=StrategyKind(args.strategy))
    metrics = run_trial(cfg)
    out = {"strategy": cfg.strategy.value, "seed": cfg.seed, **asdict(metrics)}
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if metrics.completed else 1


def _add_experiment(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("experiment", help="paired-seed strategy comparison with report files")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)


def _run_experiment_cmd(args: argparse.Namespace) -> int:
    cfg = load_trial_config(args.config) if args.config else TrialConfig()
    report = run_experiment(cfg, n_trials=args.trials, workers=args.workers)
    json_path, csv_path = write_report(report, args.out)
    summary = {
        "report": str(json_path),
        "trials_csv": str(csv_path),
        "reduction": report.reduction,
        "p_value": report.p_value,
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _add_serve(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("serve", help="run the live session server")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--bind", default=None, help="HOST:PORT; overrides config and TELETWIN_BIND")
    p.add_argument("--ui", type=Path, default=None, help="serve browser client assets from this directory")


def _run_serve(args: argparse.Namespace) -> int:
    from .service import SessionConfig, serve

    if args.config:
        config, bind = load_session_config(args.config)
    else:
        config, bind = SessionConfig(), DEFAULT_BIND
    bind = args.bind or os.environ.get("TELETWIN_BIND") or bind
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: bind address must be HOST:PORT, got '{bind}'", file=sys.stderr)
        return 2

    def announce(port: int) -> None:
        print(f"listening on ws://{host}:{port}", flush=True)
        if args.ui:
            print(f"ui at http://{host}:{port}/", flush=True)

    try:
        asyncio.run(serve(config, host, int(port_text), on_ready=announce, ui_dir=args.ui))
    except KeyboardInterrupt:
        pass
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="teletwin", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_schedule(sub)
    _add_register(sub)
    _add_trial(sub)
    _add_experiment(sub)
    _add_serve(sub)
    args = parser.parse_args(argv)
    handlers = {
        "schedule": _run_schedule,
        "register": _run_register,
        "trial": _run_trial_cmd,
        "experiment": _run_experiment_cmd,
        "serve": _run_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
