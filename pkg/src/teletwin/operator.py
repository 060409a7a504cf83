"""Synthetic operators that stream tool commands at a bounded speed.

The operator follows a waypoint plan for the peg-transfer task: approach
above a peg, descend, close the jaw, lift, traverse, descend over the
target post, open, lift. Motion is constant-speed toward the current
waypoint. While locked (baseline strategy during an outage) it emits
nothing, and after a lock ends it idles for a configurable reacquisition
delay before resuming, modeling the workflow disruption of having the
input device frozen mid-task.

Jaw actions dwell for a configurable time so that both the scene that sees
the live stream and the scene that sees the strided replay observe the jaw
transition at an essentially identical tool pose. The dwell only advances
while commands are actually emitted, so a lock cannot swallow it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .controller import ToolCommand
from .geometry import Pose, Rotation, Vec3
from .scene import (
    JAW_CLOSED,
    JAW_OPEN,
    PegLocation,
    SceneLayout,
    SceneState,
    Side,
    TaskPhase,
    peg_position,
)


class JawAction(Enum):
    CLOSE = "close"
    OPEN = "open"


@dataclass(frozen=True, slots=True)
class OperatorParams:
    max_speed: float = 0.02  # m/s tooltip speed
    waypoint_tolerance: float = 0.001
    reacquisition_delay: float = 0.5  # idle after an input lock ends
    jaw_action_time: float = 0.3

    def __post_init__(self) -> None:
        if self.max_speed <= 0:
            raise ValueError("max_speed must be positive")
        if self.reacquisition_delay < 0:
            raise ValueError("reacquisition_delay must be nonnegative")


@dataclass(frozen=True, slots=True)
class Waypoint:
    position: Vec3
    jaw_action: JawAction | None = None


@dataclass(frozen=True)
class OperatorPlan:
    waypoints: tuple[Waypoint, ...]


def _pick_place(src: Vec3, dst: Vec3, lift: float) -> list[Waypoint]:
    up_src = src + Vec3(0.0, 0.0, lift)
    up_dst = dst + Vec3(0.0, 0.0, lift)
    return [
        Waypoint(up_src),
        Waypoint(src),
        Waypoint(src, JawAction.CLOSE),
        Waypoint(up_src),
        Waypoint(up_dst),
        Waypoint(dst),
        Waypoint(dst, JawAction.OPEN),
        Waypoint(up_dst),
    ]


def _place_only(held_at: Vec3, dst: Vec3, lift: float) -> list[Waypoint]:
    up = held_at + Vec3(0.0, 0.0, lift)
    up_dst = dst + Vec3(0.0, 0.0, lift)
    return [Waypoint(up), Waypoint(up_dst), Waypoint(dst), Waypoint(dst, JawAction.OPEN), Waypoint(up_dst)]


def plan_peg_transfer(scene: SceneState, layout: SceneLayout) -> OperatorPlan:
    """Waypoint plan finishing the transfer from the scene's current state.

    Pegs are paired with posts by their home assignment (peg i to the i-th
    post of each side). A dropped peg is regrasped first; a held peg is
    placed first. A fresh scene yields the full two-leg plan, 8 waypoints
    per pick-place.
    """
    if scene.phase is TaskPhase.DONE:
        return OperatorPlan(())

    lift = layout.approach_height
    board = scene.board
    left_ids = [p.id for p in layout.posts if p.side is Side.LEFT]
    right_ids = [p.id for p in layout.posts if p.side is Side.RIGHT]
    peg_ids = [peg_id for peg_id, _ in layout.peg_start_posts]
    home = {peg_id: (left_ids[i], right_ids[i]) for i, peg_id in enumerate(peg_ids)}

    waypoints: list[Waypoint] = []

    def ordered_peg_ids() -> list[str]:
        # A held or dropped peg is dealt with first; the rest keep home order.
        def rank(peg_id: str) -> int:
            return 0 if scene.peg(peg_id).location is not PegLocation.ON_POST else 1

        return sorted(peg_ids, key=lambda pid: (rank(pid), peg_ids.index(pid)))

    def leg(target_side: Side) -> None:
        dst_slot = 1 if target_side is Side.RIGHT else 0
        for peg_id in ordered_peg_ids():
            peg = scene.peg(peg_id)
            dst = board.post(home[peg_id][dst_slot]).position
            if peg.location is PegLocation.ON_POST and board.post(peg.post_id).side is target_side:
                continue  # already delivered for this leg
            if peg.location is PegLocation.HELD:
                waypoints.extend(_place_only(peg_position(scene, peg), dst, lift))
            else:  # on a source post or dropped: regrasp at its reference point
                waypoints.extend(_pick_place(peg_position(scene, peg), dst, lift))

    if scene.phase is TaskPhase.LEFT_TO_RIGHT:
        leg(Side.RIGHT)
        # Second leg planned from the delivered configuration.
        for peg_id in peg_ids:
            src = board.post(home[peg_id][1]).position
            dst = board.post(home[peg_id][0]).position
            waypoints.extend(_pick_place(src, dst, lift))
    else:
        leg(Side.LEFT)

    return OperatorPlan(tuple(waypoints))


class Operator:
    """Streams one command per tick toward the current waypoint."""

    def __init__(self, params: OperatorParams, layout: SceneLayout, initial_scene: SceneState) -> None:
        self.params = params
        self.layout = layout
        self.plan = plan_peg_transfer(initial_scene, layout)
        self._index = 0
        self._position = layout.tool_start
        self._orientation = Rotation.identity()
        self._jaw = JAW_OPEN
        self._dwell_left: float | None = None
        self._dwell_jaw = JAW_OPEN
        self._was_locked = False
        self._resume_at = 0.0
        self._prev_now: float | None = None
        self.commands_emitted = 0

    def _replan(self, observed: SceneState) -> None:
        self.plan = plan_peg_transfer(observed, self.layout)
        self._index = 0

    def _emit(self, stamp: float) -> ToolCommand:
        self.commands_emitted += 1
        return ToolCommand(stamp, Pose(self._position, self._orientation), self._jaw)

    def _emit_dwell(self, now: float, dt: float) -> ToolCommand:
        self._jaw = self._dwell_jaw
        out = self._emit(now)
        self._dwell_left -= dt
        if self._dwell_left <= 0:
            self._dwell_left = None
            self._index += 1
        return out

    def step(self, observed: SceneState, locked: bool, now: float) -> ToolCommand | None:
        """Advance one tick; None while locked, idling, or out of work."""
        dt = 0.0 if self._prev_now is None else now - self._prev_now
        self._prev_now = now

        if locked:
            self._was_locked = True
            return None
        if self._was_locked:
            self._was_locked = False
            self._resume_at = now + self.params.reacquisition_delay
        if now < self._resume_at:
            return None

        if self._dwell_left is not None:
            return self._emit_dwell(now, dt)

        if self._index >= len(self.plan.waypoints):
            if observed.phase is TaskPhase.DONE:
                return None
            self._replan(observed)
            if not self.plan.waypoints:
                return None

        # Skip through already-satisfied motion waypoints; a reached jaw
        # waypoint starts its dwell immediately.
        while self._index < len(self.plan.waypoints):
            wp = self.plan.waypoints[self._index]
            if self._position.distance_to(wp.position) > self.params.waypoint_tolerance:
                break
            if wp.jaw_action is not None:
                self._dwell_jaw = JAW_CLOSED if wp.jaw_action is JawAction.CLOSE else JAW_OPEN
                self._dwell_left = self.params.jaw_action_time
                return self._emit_dwell(now, dt)
            self._index += 1

        if self._index >= len(self.plan.waypoints):
            return None  # plan just ran out; next tick replans or finishes

        wp = self.plan.waypoints[self._index]
        budget = self.params.max_speed * dt
        gap = self._position.distance_to(wp.position)  # > tolerance here
        if gap <= budget:
            self._position = wp.position
        elif budget > 0.0:
            s = budget / gap
            self._position = Vec3(
                self._position.x + s * (wp.position.x - self._position.x),
                self._position.y + s * (wp.position.y - self._position.y),
                self._position.z + s * (wp.position.z - self._position.z),
            )
        return self._emit(now)
