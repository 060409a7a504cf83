"""Trial and experiment runner with metrics and report files.

A trial steps channel, operator, controller, and the two scenes at the
controller tick rate until the remote scene finishes the transfer or the
time budget runs out. Everything is seeded, so identical configurations
produce byte-identical metrics and report files. Experiments pair seeds
across strategies (both strategies see the same outage schedule), which
removes schedule luck from the completion-time comparison.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .channel import RNG_ID, ChannelParams, ChannelStatus, generate_schedule, status_at
from .controller import Controller, ControllerConfig, StrategyKind, TeleopMode, ToolCommand
from .operator import Operator, OperatorParams
from .scene import (
    SceneEvent,
    SceneLayout,
    TaskPhase,
    apply_command,
    build_scene,
    default_layout,
    scene_divergence,
    task_complete,
    update_grasp,
)

CSV_COLUMNS = (
    "trial",
    "strategy",
    "seed",
    "completion_time",
    "time_normal",
    "time_outage",
    "time_recovery",
    "outage_count",
    "buffer_high_water",
    "max_divergence",
    "completed",
)


@dataclass(frozen=True)
class TrialConfig:
    strategy: StrategyKind = StrategyKind.REPLAY
    channel: ChannelParams = field(default_factory=ChannelParams)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    layout: SceneLayout = field(default_factory=default_layout)
    operator: OperatorParams = field(default_factory=OperatorParams)
    seed: int = 0
    max_duration: float = 600.0

    def __post_init__(self) -> None:
        if self.max_duration <= 0:
            raise ValueError("max_duration must be positive")


@dataclass(frozen=True)
class TrialMetrics:
    completion_time: float
    time_normal: float
    time_outage: float
    time_recovery: float
    outage_count: int
    buffer_high_water: int
    max_divergence: float
    completed: bool


@dataclass(frozen=True, slots=True)
class TraceSample:
    """One tick of a recorded trial, for invariant checks."""

    now: float
    mode: TeleopMode
    link: ChannelStatus
    remote_command_sent: bool
    divergence: float


@dataclass(frozen=True, slots=True)
class TickResult:
    mode: TeleopMode
    twin_events: tuple[SceneEvent, ...]
    remote_events: tuple[SceneEvent, ...]
    divergence: float
    remote_done: bool
    buffer_depth: int
    operator_locked: bool
    remote_command_sent: bool


class SimCore:
    """Controller plus both scenes plus per-mode time accounting.

    Shared by the batch trial runner and the live session service; each
    tick routes one optional operator command and applies the outputs to
    the twin and remote scenes.
    """

    def __init__(self, strategy: StrategyKind, controller_cfg: ControllerConfig, layout: SceneLayout) -> None:
        self.layout = layout
        self.controller = Controller(controller_cfg, strategy)
        self.remote = build_scene(layout)
        self.twin = build_scene(layout)
        self.time_in_mode = {mode: 0.0 for mode in TeleopMode}
        self.outage_count = 0
        self.max_divergence = 0.0
        self._prev_mode = TeleopMode.NORMAL

    @property
    def strategy(self) -> StrategyKind:
        return self.controller.strategy

    def tick(self, now: float, link: ChannelStatus, operator_cmd: ToolCommand | None) -> TickResult:
        out = self.controller.step(now, link, operator_cmd)
        twin_events: tuple[SceneEvent, ...] = ()
        remote_events: tuple[SceneEvent, ...] = ()
        if out.twin_command is not None:
            apply_command(self.twin, out.twin_command)
            twin_events = tuple(update_grasp(self.twin, self.layout.grasp))
            task_complete(self.twin)
        if out.remote_command is not None:
            apply_command(self.remote, out.remote_command)
            remote_events = tuple(update_grasp(self.remote, self.layout.grasp))
            task_complete(self.remote)

        self.time_in_mode[out.mode] += self.controller.cfg.dt
        if out.mode is TeleopMode.OUTAGE and self._prev_mode is not TeleopMode.OUTAGE:
            self.outage_count += 1
        self._prev_mode = out.mode

        divergence = scene_divergence(self.remote, self.twin)
        if divergence > self.max_divergence:
            self.max_divergence = divergence

        return TickResult(
            mode=out.mode,
            twin_events=twin_events,
            remote_events=remote_events,
            divergence=divergence,
            remote_done=self.remote.phase is TaskPhase.DONE,
            buffer_depth=out.buffer_depth,
            operator_locked=out.operator_locked,
            remote_command_sent=out.remote_command is not None,
        )

    def metrics(self, completion_time: float, completed: bool) -> TrialMetrics:
        return TrialMetrics(
            completion_time=completion_time,
            time_normal=self.time_in_mode[TeleopMode.NORMAL],
            time_outage=self.time_in_mode[TeleopMode.OUTAGE],
            time_recovery=self.time_in_mode[TeleopMode.RECOVERY],
            outage_count=self.outage_count,
            buffer_high_water=self.controller.buffer.high_water,
            max_divergence=self.max_divergence,
            completed=completed,
        )


def run_trial(cfg: TrialConfig, trace: list[TraceSample] | None = None) -> TrialMetrics:
    """One deterministic trial; optionally records a per-tick trace."""
    schedule = generate_schedule(cfg.channel, cfg.max_duration, cfg.seed)
    core = SimCore(cfg.strategy, cfg.controller, cfg.layout)
    operator = Operator(cfg.operator, cfg.layout, core.twin)
    dt = cfg.controller.dt
    ticks = int(round(cfg.max_duration / dt))

    for k in range(ticks):
        now = k * dt
        link = status_at(schedule, now)
        locked = cfg.strategy is StrategyKind.BASELINE and link is ChannelStatus.DOWN
        observed = core.twin if cfg.strategy is StrategyKind.REPLAY else core.remote
        cmd = operator.step(observed, locked, now)
        res = core.tick(now, link, cmd)
        if trace is not None:
            trace.append(TraceSample(now, res.mode, link, res.remote_command_sent, res.divergence))
        if res.remote_done:
            return core.metrics(completion_time=(k + 1) * dt, completed=True)
    return core.metrics(completion_time=ticks * dt, completed=False)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    strategy: StrategyKind
    seed: int
    metrics: TrialMetrics


@dataclass(frozen=True)
class StrategySummary:
    strategy: StrategyKind
    n: int
    mean_completion: float
    std_completion: float
    timeouts: int


@dataclass(frozen=True)
class ExperimentReport:
    trials: tuple[TrialRecord, ...]
    summaries: tuple[StrategySummary, ...]
    reduction: float | None
    t_statistic: float | None
    p_value: float | None
    config_echo: dict
    rng_id: str = RNG_ID


def completion_reduction(mean_baseline: float, mean_replay: float) -> float:
    """Fractional completion-time reduction of replay relative to baseline."""
    return (mean_baseline - mean_replay) / mean_baseline


def _run_trial_for_record(args: tuple[int, TrialConfig]) -> TrialRecord:
    index, cfg = args
    return TrialRecord(index, cfg.strategy, cfg.seed, run_trial(cfg))


def run_experiment(
    base_cfg: TrialConfig,
    n_trials: int,
    strategies: tuple[StrategyKind, ...] = (StrategyKind.BASELINE, StrategyKind.REPLAY),
    seeds: list[int] | None = None,
    workers: int = 1,
) -> ExperimentReport:
    """Paired-seed trials across strategies, aggregated with a Welch t-test."""
    import numpy as np

    if n_trials < 2:
        raise ValueError("at least 2 trials per strategy are required")
    if seeds is None:
        seeds = [base_cfg.seed + i for i in range(n_trials)]
    if len(seeds) != n_trials:
        raise ValueError("seed stream length must match n_trials")

    jobs: list[tuple[int, TrialConfig]] = []
    index = 0
    for seed in seeds:
        for strategy in strategies:
            jobs.append((index, replace(base_cfg, strategy=strategy, seed=seed)))
            index += 1

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_trial_for_record, jobs))
    else:
        records = [_run_trial_for_record(job) for job in jobs]
    records.sort(key=lambda r: r.index)

    summaries = []
    times: dict[StrategyKind, list[float]] = {}
    for strategy in strategies:
        ts = [r.metrics.completion_time for r in records if r.strategy is strategy]
        times[strategy] = ts
        summaries.append(
            StrategySummary(
                strategy=strategy,
                n=len(ts),
                mean_completion=float(np.mean(ts)),
                std_completion=float(np.std(ts, ddof=1)),
                timeouts=sum(1 for r in records if r.strategy is strategy and not r.metrics.completed),
            )
        )

    reduction = t_stat = p_value = None
    if StrategyKind.BASELINE in times and StrategyKind.REPLAY in times:
        from scipy import stats

        base, rep = times[StrategyKind.BASELINE], times[StrategyKind.REPLAY]
        reduction = completion_reduction(float(np.mean(base)), float(np.mean(rep)))
        if np.std(base) == 0.0 and np.std(rep) == 0.0 and np.mean(base) == np.mean(rep):
            # Degenerate deterministic case: identical outcomes carry no
            # evidence of a difference.
            t_stat, p_value = 0.0, 1.0
        else:
            welch = stats.ttest_ind(base, rep, equal_var=False)
            t_stat, p_value = float(welch.statistic), float(welch.pvalue)

    return ExperimentReport(
        trials=tuple(records),
        summaries=tuple(summaries),
        reduction=reduction,
        t_statistic=t_stat,
        p_value=p_value,
        config_echo=config_to_jsonable(base_cfg),
    )


def config_to_jsonable(cfg: TrialConfig) -> dict:
    """Plain-JSON echo of a trial configuration."""
    from enum import Enum

    def scrub(value):
        if isinstance(value, Enum):
            return value.value
        if isinstance(value, dict):
            return {k: scrub(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [scrub(v) for v in value]
        return value

    return scrub(asdict(cfg))


def report_to_jsonable(report: ExperimentReport) -> dict:
    return {
        "rng": report.rng_id,
        "reduction": report.reduction,
        "t_statistic": report.t_statistic,
        "p_value": report.p_value,
        "summaries": [
            {
                "strategy": s.strategy.value,
                "n": s.n,
                "mean_completion": s.mean_completion,
                "std_completion": s.std_completion,
                "timeouts": s.timeouts,
            }
            for s in report.summaries
        ],
        "trials": [
            {
                "trial": r.index,
                "strategy": r.strategy.value,
                "seed": r.seed,
                **asdict(r.metrics),
            }
            for r in report.trials
        ],
        "config": report.config_echo,
    }


def trials_csv(report: ExperimentReport) -> str:
    """Fixed-column CSV, one row per trial; floats keep full precision."""
    lines = [",".join(CSV_COLUMNS)]
    for r in report.trials:
        m = r.metrics
        row = (
            str(r.index),
            r.strategy.value,
            str(r.seed),
            repr(m.completion_time),
            repr(m.time_normal),
            repr(m.time_outage),
            repr(m.time_recovery),
            str(m.outage_count),
            str(m.buffer_high_water),
            repr(m.max_divergence),
            str(m.completed).lower(),
        )
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, out_dir: str | Path) -> tuple[Path, Path]:
    """Emit report.json and trials.csv into out_dir; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "report.json"
    csv_path = out / "trials.csv"
    json_path.write_text(json.dumps(report_to_jsonable(report), indent=2, sort_keys=True) + "\n")
    csv_path.write_text(trials_csv(report))
    return json_path, csv_path


def read_trials_csv(path: str | Path) -> list[dict]:
    """Read back a trials.csv into typed dicts (inverse of trials_csv)."""
    import csv

    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                {
                    "trial": int(row["trial"]),
                    "strategy": row["strategy"],
                    "seed": int(row["seed"]),
                    "completion_time": float(row["completion_time"]),
                    "time_normal": float(row["time_normal"]),
                    "time_outage": float(row["time_outage"]),
                    "time_recovery": float(row["time_recovery"]),
                    "outage_count": int(row["outage_count"]),
                    "buffer_high_water": int(row["buffer_high_water"]),
                    "max_divergence": float(row["max_divergence"]),
                    "completed": row["completed"] == "true",
                }
            )
    return rows
