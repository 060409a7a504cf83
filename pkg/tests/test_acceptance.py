"""Acceptance suite: one test per release criterion, tolerances pinned.

Run `pytest tests/test_acceptance.py -v -s` to get one PASS/FAIL line per
criterion. Criteria 3 and 4 share one batch of 50 paired-seed trials.
"""

import math
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from teletwin.channel import (
    ChannelParams,
    ChannelStatus,
    generate_schedule,
    outage_fraction,
    schedule_to_csv,
)
from teletwin.controller import (
    Controller,
    ControllerConfig,
    StrategyKind,
    TeleopMode,
    ToolCommand,
)
from teletwin.geometry import Pose, RigidTransform, Rotation, Vec3, transform_point
from teletwin.harness import (
    TraceSample,
    TrialConfig,
    completion_reduction,
    run_experiment,
    run_trial,
    trials_csv,
)
from teletwin.operator import OperatorParams
from teletwin.registration import PointPairSet, register_paired_points

UP, DOWN = ChannelStatus.UP, ChannelStatus.DOWN

REFERENCE_CHANNEL = ChannelParams(mean_up=3.2, std_up=0.15, mean_down=0.8, std_down=0.1)

ACCEPT_CFG = TrialConfig(
    strategy=StrategyKind.REPLAY,
    channel=REFERENCE_CHANNEL,
    controller=ControllerConfig(tick_rate=100.0),
    operator=OperatorParams(max_speed=0.08, reacquisition_delay=0.0, jaw_action_time=0.2),
    seed=1000,
    max_duration=300.0,
)
N_TRIALS = 50


@contextmanager
def criterion(number: int, name: str):
    try:
        yield
    except Exception:
        print(f"FAIL criterion {number}: {name}")
        raise
    print(f"PASS criterion {number}: {name}")


def steady_cmd(now: float) -> ToolCommand:
    return ToolCommand(now, Pose(Vec3(now * 0.001, 0.0, 0.0), Rotation.identity()), 0.5)


def run_outage_cycle(tick_rate: float, outage_s: float, with_input: bool = True) -> tuple[int, int, Controller]:
    """Drive a replay controller through one isolated outage.

    The outage covers sim time [t0, t0 + outage_s); returns the number of
    down ticks, the number of recovery ticks, and the controller.
    """
    c = Controller(ControllerConfig(tick_rate=tick_rate), StrategyKind.REPLAY)
    dt = 1.0 / tick_rate
    t0 = 10 * dt
    down_ticks = 0
    recovery_ticks = 0
    k = 0
    while True:
        now = k * dt
        link = DOWN if t0 <= now < t0 + outage_s else UP
        out = c.step(now, link, steady_cmd(now) if with_input else None)
        if out.mode is TeleopMode.OUTAGE:
            down_ticks += 1
        elif out.mode is TeleopMode.RECOVERY:
            recovery_ticks += 1
        if now > t0 + outage_s and out.mode is TeleopMode.NORMAL:
            return down_ticks, recovery_ticks, c
        k += 1
        assert k < 10 * tick_rate * (outage_s + 1), "cycle never settled"


def test_criterion_1_recovery_time_law():
    with criterion(1, "recovery duration equals outage duration within one tick"):
        rng = np.random.default_rng(20240)
        for _ in range(200):
            tick_rate = float(rng.choice([50.0, 100.0, 200.0]))
            outage_s = float(rng.uniform(0.1, 5.0))
            _, recovery_ticks, _ = run_outage_cycle(tick_rate, outage_s)
            assert abs(recovery_ticks / tick_rate - outage_s) <= 1.0 / tick_rate + 1e-12


def test_criterion_2_channel_statistics():
    with criterion(2, "channel period statistics and 20% outage fraction"):
        sched = generate_schedule(REFERENCE_CHANNEL, horizon=45_000.0, seed=7)
        ups = [iv.end - iv.start for iv in sched.intervals[:-1] if iv.status is UP]
        downs = [iv.end - iv.start for iv in sched.intervals[:-1] if iv.status is DOWN]
        assert len(ups) >= 10_000 and len(downs) >= 10_000
        assert abs(np.mean(ups) - 3.2) / 3.2 < 0.01
        assert abs(np.mean(downs) - 0.8) / 0.8 < 0.01
        assert abs(np.std(ups, ddof=1) - 0.15) / 0.15 < 0.05
        assert abs(np.std(downs, ddof=1) - 0.1) / 0.1 < 0.05
        frac = outage_fraction(generate_schedule(REFERENCE_CHANNEL, horizon=10_000.0, seed=8))
        assert abs(frac - 0.20) <= 0.01


@pytest.fixture(scope="module")
def structural_runs():
    """50 paired-seed trials at delta=0, the delta=0.5 baseline sweep, and
    traced replay runs; shared by criteria 3 and 4."""
    exp0 = run_experiment(ACCEPT_CFG, n_trials=N_TRIALS)

    slow_op = replace(ACCEPT_CFG.operator, reacquisition_delay=0.5)
    base05 = [
        run_trial(replace(ACCEPT_CFG, strategy=StrategyKind.BASELINE, operator=slow_op, seed=ACCEPT_CFG.seed + i))
        for i in range(N_TRIALS)
    ]

    traces: list[tuple[TrialConfig, list[TraceSample], object]] = []
    for i in range(N_TRIALS):
        cfg = replace(ACCEPT_CFG, strategy=StrategyKind.REPLAY, seed=ACCEPT_CFG.seed + i)
        trace: list[TraceSample] = []
        metrics = run_trial(cfg, trace=trace)
        traces.append((cfg, trace, metrics))
    return {"exp0": exp0, "base05": base05, "traces": traces}


def test_criterion_3_structural_reduction_law(structural_runs):
    with criterion(3, "paired reduction near the 20% outage fraction, larger with idle delay"):
        exp0 = structural_runs["exp0"]
        assert exp0.reduction is not None
        assert 0.17 <= exp0.reduction <= 0.23, f"delta=0 reduction {exp0.reduction:.4f}"

        replay_mean = next(s.mean_completion for s in exp0.summaries if s.strategy is StrategyKind.REPLAY)
        base05_mean = float(np.mean([m.completion_time for m in structural_runs["base05"]]))
        reduction05 = completion_reduction(base05_mean, replay_mean)
        assert reduction05 > exp0.reduction, (
            f"reacquisition delay must increase the reduction ({reduction05:.4f} vs {exp0.reduction:.4f})"
        )

        # Human-operator group means (178.6 s vs 137.0 s) serve as a
        # report-format fixture and a directionality check only; the
        # synthetic harness is not expected to reproduce them.
        fixture = completion_reduction(178.6, 137.0)
        assert fixture > 0.20
        assert exp0.p_value is not None and exp0.p_value < 0.005


def test_criterion_4_convergence_and_stationarity(structural_runs):
    with criterion(4, "post-recovery divergence zero within a command quantum; remote frozen while down"):
        quantum = ACCEPT_CFG.operator.max_speed / ACCEPT_CFG.controller.tick_rate
        for cfg, trace, metrics in structural_runs["traces"]:
            assert metrics.completed, f"seed {cfg.seed} timed out"
            recovered = False
            for prev, cur in zip(trace, trace[1:]):
                if prev.mode is TeleopMode.RECOVERY and cur.mode is TeleopMode.NORMAL:
                    recovered = True
                    assert cur.divergence <= quantum + 1e-12, (
                        f"seed {cfg.seed}: divergence {cur.divergence} at recovery end"
                    )
            assert recovered, f"seed {cfg.seed} never exercised a recovery"
            for sample in trace:
                if sample.link is DOWN:
                    assert not sample.remote_command_sent


def test_criterion_5_registration():
    with criterion(5, "rigid registration: exact recovery, proper rotations, noise floor"):
        rng = np.random.default_rng(501)
        for _ in range(100):
            true = RigidTransform("environment", "base", Rotation(*rng.normal(size=4)), Vec3(*rng.uniform(-0.5, 0.5, 3)))
            model = tuple(Vec3(*rng.uniform(-0.2, 0.2, 3)) for _ in range(10))
            robot = tuple(transform_point(true, p) for p in model)
            result = register_paired_points(PointPairSet(model, robot))
            assert result.fre_rms < 1e-9
            assert result.transform.rotation.angle_to(true.rotation) < 1e-9
            assert result.transform.translation.distance_to(true.translation) < 1e-9
            assert np.linalg.det(np.array(result.transform.rotation.to_matrix())) == pytest.approx(1.0, abs=1e-9)

        fres = []
        for _ in range(100):
            true = RigidTransform("environment", "base", Rotation(*rng.normal(size=4)), Vec3(*rng.uniform(-0.5, 0.5, 3)))
            model = tuple(Vec3(*rng.uniform(-0.2, 0.2, 3)) for _ in range(10))
            robot = tuple(
                transform_point(true, p) + Vec3(*rng.normal(0.0, 0.0005, 3)) for p in model
            )
            result = register_paired_points(PointPairSet(model, robot))
            det = np.linalg.det(np.array(result.transform.rotation.to_matrix()))
            assert det == pytest.approx(1.0, abs=1e-9)
            fres.append(result.fre_rms)
        assert 0.0004 <= float(np.mean(fres)) <= 0.001


def test_criterion_6_determinism():
    with criterion(6, "byte-identical trial CSVs and schedules per seed"):
        cfg = replace(ACCEPT_CFG, max_duration=120.0)
        a = trials_csv(run_experiment(cfg, n_trials=3))
        b = trials_csv(run_experiment(cfg, n_trials=3))
        assert a.encode() == b.encode()
        for seed in (0, 1, 12345):
            s1 = schedule_to_csv(generate_schedule(REFERENCE_CHANNEL, 500.0, seed))
            s2 = schedule_to_csv(generate_schedule(REFERENCE_CHANNEL, 500.0, seed))
            assert s1.encode() == s2.encode()


def test_criterion_7_controller_unit_ledger():
    with criterion(7, "baseline lock, replay skip pattern, buffer high-water mark"):
        # Baseline lock: no commands pass and the operator is flagged locked.
        c = Controller(ControllerConfig(tick_rate=100.0), StrategyKind.BASELINE)
        dt = 0.01
        for k in range(50):
            link = DOWN if 10 <= k < 30 else UP
            out = c.step(k * dt, link, steady_cmd(k * dt))
            assert out.operator_locked == (link is DOWN)
            if link is DOWN:
                assert out.twin_command is None and out.remote_command is None

        # Replay skip pattern: remote sees exactly every 2nd buffered pose
        # and always the final one; an odd leftover is transmitted alone.
        for buffered_count in (9, 10):
            c = Controller(ControllerConfig(tick_rate=100.0), StrategyKind.REPLAY)
            c.step(0.0, UP, steady_cmd(0.0))
            stamps = []
            for k in range(1, buffered_count + 1):
                cmd = ToolCommand(k * dt, Pose(Vec3(float(k), 0, 0), Rotation.identity()), 0.5)
                c.step(k * dt, DOWN, cmd)
                stamps.append(float(k))
            received = []
            k = buffered_count + 1
            while True:
                out = c.step(k * dt, UP, None)
                if out.remote_command is not None:
                    received.append(out.remote_command.pose.position.x)
                if out.mode is TeleopMode.NORMAL:
                    break
                k += 1
            assert received == stamps[1::2] + ([stamps[-1]] if buffered_count % 2 else [])
            assert received[-1] == stamps[-1]

        # High-water mark equals the ceiling of outage length times tick rate.
        for tick_rate in (50.0, 100.0, 200.0):
            for outage_s in (0.1, 0.37, 1.0, 2.49):
                down_ticks, _, c = run_outage_cycle(tick_rate, outage_s)
                assert c.buffer.high_water == down_ticks
                assert abs(down_ticks - math.ceil(outage_s * tick_rate)) <= 1
