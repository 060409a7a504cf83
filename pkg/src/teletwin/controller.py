"""Command routing between the operator, the twin, and the remote robot.

One controller instance is stepped once per tick. Under normal link status
every operator command goes to both the twin and the remote. While the link
is down the remote never receives anything; the baseline strategy locks the
operator out entirely, while the replay strategy keeps driving the twin and
records each command into a FIFO buffer. On restore the replay strategy
enters a recovery phase: new commands keep entering the buffer while the
remote consumes `replay_stride` entries per tick (transmitting the latest of
each group, so the final buffered pose is always delivered). With stride 2
and a continuously active operator the net drain is one entry per tick, so
an outage of T seconds is followed by a recovery of T seconds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .channel import ChannelStatus
from .geometry import Pose, interpolate_pose

JAW_MAX = 1.0  # radians, fully open


class ClockRegressionError(RuntimeError):
    """Tick timestamps repeated or moved backwards."""


class BufferCapacityError(RuntimeError):
    """Outage outlasted the configured replay memory; commands would be lost."""


class TeleopMode(Enum):
    NORMAL = "normal"
    OUTAGE = "outage"
    RECOVERY = "recovery"


class StrategyKind(Enum):
    BASELINE = "baseline"
    REPLAY = "replay"


@dataclass(frozen=True, slots=True)
class ToolCommand:
    """One Cartesian servo target with timestamp and jaw angle."""

    stamp: float
    pose: Pose
    jaw: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.jaw <= JAW_MAX:
            raise ValueError(f"jaw angle {self.jaw} outside [0, {JAW_MAX}]")


@dataclass(frozen=True, slots=True)
class ControllerConfig:
    tick_rate: float = 100.0  # Hz
    replay_stride: int = 2
    buffer_cap: int | None = None  # defaults to 60 s of commands
    remote_speed_limit: float | None = None  # m/s clamp on replayed motion; off by default

    def __post_init__(self) -> None:
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be positive")
        if self.replay_stride < 1:
            raise ValueError("replay_stride must be at least 1")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    @property
    def effective_buffer_cap(self) -> int:
        if self.buffer_cap is not None:
            return self.buffer_cap
        return int(60.0 * self.tick_rate)


class CommandBuffer:
    """FIFO of commands accumulated during outage and recovery.

    The high-water mark is sampled at tick boundaries (after the tick's
    pushes and pops), so for an isolated outage of length T at rate r it
    equals ceil(T * r) under continuous operator input.
    """

    def __init__(self, cap: int) -> None:
        self._cap = cap
        self._fifo: deque[ToolCommand] = deque()
        self.high_water = 0

    def __len__(self) -> int:
        return len(self._fifo)

    def push(self, cmd: ToolCommand) -> None:
        if len(self._fifo) >= self._cap:
            raise BufferCapacityError(f"replay buffer full at {self._cap} commands")
        self._fifo.append(cmd)

    def pop(self) -> ToolCommand:
        return self._fifo.popleft()

    def record_high_water(self) -> None:
        if len(self._fifo) > self.high_water:
            self.high_water = len(self._fifo)

    def clear(self) -> None:
        self._fifo.clear()
        self.high_water = 0


@dataclass(frozen=True, slots=True)
class ControllerOutput:
    """One tick's routing decision; immutable snapshot."""

    mode: TeleopMode
    twin_command: ToolCommand | None
    remote_command: ToolCommand | None
    operator_locked: bool
    buffer_depth: int


class Controller:
    """Single-owner state machine; the session loop is the only caller."""

    def __init__(self, cfg: ControllerConfig | None = None, strategy: StrategyKind = StrategyKind.REPLAY) -> None:
        self.cfg = cfg or ControllerConfig()
        self.strategy = strategy
        self.mode = TeleopMode.NORMAL
        self.buffer = CommandBuffer(self.cfg.effective_buffer_cap)
        self._last_now: float | None = None
        self._last_remote_pose: Pose | None = None

    def reset(self) -> None:
        self.mode = TeleopMode.NORMAL
        self.buffer.clear()
        self._last_now = None
        self._last_remote_pose = None

    def step(self, now: float, link: ChannelStatus, operator_cmd: ToolCommand | None) -> ControllerOutput:
        if self._last_now is not None and now <= self._last_now:
            raise ClockRegressionError(f"tick time {now} not after previous {self._last_now}")
        self._last_now = now

        # Link edge decides the mode this tick runs in.
        if link is ChannelStatus.DOWN:
            mode = TeleopMode.OUTAGE
        elif self.mode is TeleopMode.OUTAGE:
            mode = TeleopMode.NORMAL if self.strategy is StrategyKind.BASELINE else TeleopMode.RECOVERY
        else:
            mode = self.mode
        self.mode = mode

        twin_cmd: ToolCommand | None = None
        remote_cmd: ToolCommand | None = None
        locked = False

        if mode is TeleopMode.NORMAL:
            twin_cmd = operator_cmd
            remote_cmd = operator_cmd
        elif mode is TeleopMode.OUTAGE:
            if self.strategy is StrategyKind.BASELINE:
                locked = True
            else:
                twin_cmd = operator_cmd
                if operator_cmd is not None:
                    self.buffer.push(operator_cmd)
        else:  # RECOVERY
            if operator_cmd is not None:
                self.buffer.push(operator_cmd)
                twin_cmd = operator_cmd
            drained = min(self.cfg.replay_stride, len(self.buffer))
            for _ in range(drained):
                remote_cmd = self.buffer.pop()
            if len(self.buffer) == 0:
                self.mode = TeleopMode.NORMAL  # takes effect next tick

        if remote_cmd is not None:
            remote_cmd = self._clamp_remote(remote_cmd)
            self._last_remote_pose = remote_cmd.pose

        self.buffer.record_high_water()
        return ControllerOutput(
            mode=mode,
            twin_command=twin_cmd,
            remote_command=remote_cmd,
            operator_locked=locked,
            buffer_depth=len(self.buffer),
        )

    def _clamp_remote(self, cmd: ToolCommand) -> ToolCommand:
        limit = self.cfg.remote_speed_limit
        if limit is None or self._last_remote_pose is None:
            return cmd
        max_step = limit * self.cfg.dt
        dist = cmd.pose.position.distance_to(self._last_remote_pose.position)
        if dist <= max_step:
            return cmd
        s = max_step / dist
        return ToolCommand(cmd.stamp, interpolate_pose(self._last_remote_pose, cmd.pose, s), cmd.jaw)
