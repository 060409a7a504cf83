"""Live session server: one simulation loop per connected operator.

Transport is WebSocket, one JSON object per frame with a ``type`` field.
Each connection gets a fully isolated session (own controller, scenes,
schedule, and clock). The simulated outage applies to the operator-remote
model link only; the transport to the UI keeps streaming state frames at
the broadcast rate so the client can always render the frozen remote scene
next to the live twin.

Client to server:
    {"type": "command", "pose": POSE, "jaw": f}
    {"type": "set_strategy", "value": "baseline" | "replay"}
    {"type": "reset"}
    {"type": "inject_outage", "duration": f}
    {"type": "set_seed", "value": n}
Server to client:
    {"type": "state", ...}    one per broadcast interval, single-tick snapshot
    {"type": "event", "name": "grasp" | "release" | "task_done" | ...}
    {"type": "error", "message": ..., "offending": ...}

POSE is {"position": {"x","y","z"}, "orientation": {"w","x","y","z"}}.
Control messages take effect at the next tick boundary; multiple commands
arriving within one tick collapse to the last one.
"""

from __future__ import annotations

import asyncio
import json
import logging
from dataclasses import dataclass, field

from .channel import ChannelParams, ChannelStatus, OutageSchedule, generate_schedule, status_at
from .controller import JAW_MAX, ControllerConfig, StrategyKind, TeleopMode, ToolCommand
from .geometry import CameraIntrinsics, Pose, RigidTransform, Rotation, Vec3, invert
from .harness import SimCore
from .registration import overlay_silhouette
from .scene import PegDropped, PegGrasped, PegPlaced, SceneLayout, SceneState, default_layout

logger = logging.getLogger(__name__)


def default_camera() -> "CameraSetup":
    """Overhead camera half a meter above the board, looking straight down."""
    import math

    flip = Rotation.from_axis_angle(Vec3(1, 0, 0), math.pi)
    pose_in_base = invert(RigidTransform("base", "camera", flip, Vec3(0, 0, 0.5)))
    intrinsics = CameraIntrinsics(fx=800.0, fy=800.0, cx=480.0, cy=270.0, width=960, height=540)
    return CameraSetup(intrinsics, pose_in_base)


@dataclass(frozen=True)
class CameraSetup:
    """Intrinsics plus the camera pose in the robot base frame."""

    intrinsics: CameraIntrinsics
    pose_in_base: RigidTransform  # camera -> base

    def projection_extrinsic(self) -> RigidTransform:
        return invert(self.pose_in_base)


@dataclass(frozen=True)
class SessionConfig:
    strategy: StrategyKind = StrategyKind.REPLAY
    channel: ChannelParams | None = None  # None: link is up unless an outage is injected
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    layout: SceneLayout = field(default_factory=default_layout)
    camera: CameraSetup = field(default_factory=default_camera)
    broadcast_rate: float = 30.0
    time_scale: float = 1.0  # simulated seconds per wall second
    schedule_seed: int = 0
    schedule_horizon: float = 3600.0

    def __post_init__(self) -> None:
        if self.broadcast_rate <= 0 or self.broadcast_rate > self.controller.tick_rate:
            raise ValueError("broadcast rate must be positive and no faster than the tick rate")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")


def _vec_to_wire(v: Vec3) -> dict:
    return {"x": v.x, "y": v.y, "z": v.z}


def _pose_to_wire(p: Pose) -> dict:
    o = p.orientation
    return {"position": _vec_to_wire(p.position), "orientation": {"w": o.w, "x": o.x, "y": o.y, "z": o.z}}


def pose_from_wire(d: dict) -> Pose:
    pos = d["position"]
    ori = d["orientation"]
    return Pose(
        Vec3(float(pos["x"]), float(pos["y"]), float(pos["z"])),
        Rotation(float(ori["w"]), float(ori["x"]), float(ori["y"]), float(ori["z"])),
    )


def _scene_to_wire(scene: SceneState) -> dict:
    from .scene import peg_position

    pegs = []
    for peg in scene.pegs:
        pegs.append(
            {
                "id": peg.id,
                "location": peg.location.value,
                "post": peg.post_id,
                "position": _vec_to_wire(peg_position(scene, peg)),
            }
        )
    tool = None
    if scene.tool is not None:
        tool = {"pose": _pose_to_wire(scene.tool.pose), "jaw": scene.tool.jaw}
    return {
        "phase": scene.phase.value,
        "tool": tool,
        "pegs": pegs,
        "board": {
            "capture_radius": scene.board.capture_radius,
            "plane_height": scene.board.plane_height,
            "posts": [
                {"id": p.id, "side": p.side.value, "position": _vec_to_wire(p.position)}
                for p in scene.board.posts
            ],
        },
    }


class Session:
    """State for one connection; advanced exclusively by its tick loop."""

    def __init__(self, config: SessionConfig) -> None:
        self.config = config
        self._extrinsic = config.camera.projection_extrinsic()
        self._broadcast_every = max(1, round(config.controller.tick_rate / config.broadcast_rate))
        self._inbox: list[dict] = []
        self._strategy = config.strategy
        self.seed = config.schedule_seed
        self._reset_state()

    def _reset_state(self) -> None:
        """Fresh scenes, controller, clock, and schedule; strategy and seed persist."""
        self.core = SimCore(self._strategy, self.config.controller, self.config.layout)
        self.tick_index = 0
        self._schedule: OutageSchedule | None = None
        self._schedule_offset = 0.0
        self._schedule_seed_step = 0
        if self.config.channel is not None:
            self._schedule = generate_schedule(self.config.channel, self.config.schedule_horizon, self.seed)
        self._inject_until = -1.0
        self._pending_command: ToolCommand | None = None
        self._task_done_sent = False

    @property
    def now(self) -> float:
        return self.tick_index * self.config.controller.dt

    def handle_message(self, raw: str) -> list[dict]:
        """Parse and queue one inbound message; returns immediate replies."""
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as exc:
            return [{"type": "error", "message": f"malformed JSON: {exc}", "offending": raw[:200]}]
        if not isinstance(msg, dict) or "type" not in msg:
            return [{"type": "error", "message": "message must be an object with a 'type' field", "offending": msg}]
        kind = msg["type"]
        if kind == "command":
            try:
                pose = pose_from_wire(msg["pose"])
                jaw = float(msg.get("jaw", 0.0))
                if not 0.0 <= jaw <= JAW_MAX:
                    raise ValueError(f"jaw {jaw} outside [0, {JAW_MAX}]")
            except (KeyError, TypeError, ValueError) as exc:
                return [{"type": "error", "message": f"bad command: {exc}", "offending": msg}]
            self._inbox.append({"type": "command", "pose": pose, "jaw": jaw})
            return []
        if kind == "set_strategy":
            if msg.get("value") not in ("baseline", "replay"):
                return [{"type": "error", "message": "set_strategy value must be 'baseline' or 'replay'", "offending": msg}]
            self._inbox.append(msg)
            return []
        if kind == "inject_outage":
            try:
                duration = float(msg["duration"])
                if duration <= 0:
                    raise ValueError("duration must be positive")
            except (KeyError, TypeError, ValueError) as exc:
                return [{"type": "error", "message": f"bad inject_outage: {exc}", "offending": msg}]
            self._inbox.append({"type": "inject_outage", "duration": duration})
            return []
        if kind == "set_seed":
            try:
                self._inbox.append({"type": "set_seed", "value": int(msg["value"])})
            except (KeyError, TypeError, ValueError) as exc:
                return [{"type": "error", "message": f"bad set_seed: {exc}", "offending": msg}]
            return []
        if kind == "reset":
            self._inbox.append({"type": "reset"})
            return []
        return [{"type": "error", "message": f"unknown message type '{kind}'", "offending": msg}]

    def _apply_pending(self) -> None:
        """Apply queued control messages at the tick boundary."""
        for msg in self._inbox:
            kind = msg["type"]
            if kind == "command":
                self._pending_command = ToolCommand(self.now, msg["pose"], msg["jaw"])
            elif kind == "set_strategy":
                new = StrategyKind(msg["value"])
                if new is not self._strategy:
                    self._strategy = new
                    self.core.controller.strategy = new
                    self.core.controller.reset()
            elif kind == "inject_outage":
                self._inject_until = self.now + msg["duration"]
            elif kind == "set_seed":
                self.seed = msg["value"]
                if self.config.channel is not None:
                    self._schedule = generate_schedule(
                        self.config.channel, self.config.schedule_horizon, self.seed
                    )
                    self._schedule_offset = self.now
                    self._schedule_seed_step = 0
            elif kind == "reset":
                self._reset_state()
        self._inbox.clear()

    def _link_now(self) -> ChannelStatus:
        if self.now < self._inject_until:
            return ChannelStatus.DOWN
        if self._schedule is None:
            return ChannelStatus.UP
        local_t = self.now - self._schedule_offset
        while local_t >= self._schedule.horizon:
            # Roll into a fresh window with a derived seed.
            self._schedule_offset += self._schedule.horizon
            self._schedule_seed_step += 1
            self._schedule = generate_schedule(
                self.config.channel, self.config.schedule_horizon, self.seed + self._schedule_seed_step
            )
            local_t = self.now - self._schedule_offset
        return status_at(self._schedule, local_t)

    def _state_frame(self, link: ChannelStatus, mode: TeleopMode, buffer_depth: int, locked: bool) -> dict:
        overlay = overlay_silhouette(self.core.twin, self._extrinsic, self.config.camera.intrinsics)
        return {
            "type": "state",
            "now": self.now,
            "mode": mode.value,
            "link": link.value,
            "strategy": self.core.controller.strategy.value,
            "remote": _scene_to_wire(self.core.remote),
            "twin": _scene_to_wire(self.core.twin),
            "overlay": [{"label": p.label, "kind": p.kind, "points": list(p.points)} for p in overlay],
            "buffer_depth": buffer_depth,
            "operator_locked": locked,
        }

    def _event_frames(self, events, scene_name: str) -> list[dict]:
        frames = []
        for ev in events:
            if isinstance(ev, PegGrasped):
                frames.append({"type": "event", "name": "grasp", "scene": scene_name, "peg": ev.peg_id})
            elif isinstance(ev, PegPlaced):
                frames.append(
                    {"type": "event", "name": "release", "scene": scene_name, "peg": ev.peg_id, "post": ev.post_id}
                )
            elif isinstance(ev, PegDropped):
                frames.append({"type": "event", "name": "release", "scene": scene_name, "peg": ev.peg_id, "post": None})
        return frames

    def tick(self) -> list[dict]:
        """Advance one simulation tick; returns the frames to transmit."""
        self._apply_pending()
        link = self._link_now()
        locked = self.core.controller.strategy is StrategyKind.BASELINE and link is ChannelStatus.DOWN
        out: list[dict] = []

        cmd = self._pending_command
        self._pending_command = None
        if cmd is not None and locked:
            out.append({"type": "event", "name": "command_locked", "locked": True})
            cmd = None

        res = self.core.tick(self.now, link, cmd)
        out.extend(self._event_frames(res.twin_events, "twin"))
        out.extend(self._event_frames(res.remote_events, "remote"))

        if res.remote_done and not self._task_done_sent:
            self._task_done_sent = True
            from dataclasses import asdict

            metrics = self.core.metrics(completion_time=(self.tick_index + 1) * self.config.controller.dt,
                                         completed=True)
            out.append({"type": "event", "name": "task_done", "metrics": asdict(metrics)})

        if self.tick_index % self._broadcast_every == 0:
            out.append(self._state_frame(link, res.mode, res.buffer_depth, res.operator_locked))
        self.tick_index += 1
        return out


async def run_session(ws, config: SessionConfig) -> None:
    """Tick loop plus reader for one accepted connection."""
    session = Session(config)
    loop = asyncio.get_running_loop()
    wall_dt = config.controller.dt / config.time_scale

    async def reader() -> None:
        async for raw in ws:
            for reply in session.handle_message(raw):
                await ws.send(json.dumps(reply))

    reader_task = asyncio.create_task(reader())
    next_wall = loop.time()
    try:
        while True:
            for frame in session.tick():
                await ws.send(json.dumps(frame))
            next_wall += wall_dt
            delay = next_wall - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_wall = loop.time()  # fell behind; do not accumulate debt
    finally:
        reader_task.cancel()


_STATIC_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".map": "application/json",
    ".css": "text/css; charset=utf-8",
}


def _static_file_responder(ui_dir):
    """Plain-HTTP handler serving UI assets from one directory tree."""
    from pathlib import Path

    from websockets.datastructures import Headers
    from websockets.http11 import Response

    root = Path(ui_dir).resolve()

    def file_response(status: int, reason: str, body: bytes, content_type: str) -> Response:
        headers = Headers(
            [("Content-Type", content_type), ("Content-Length", str(len(body)))]
        )
        return Response(status, reason, headers, body)

    def respond(connection, request):
        if "Upgrade" in request.headers:
            return None  # WebSocket handshake proceeds normally
        path = request.path.split("?", 1)[0]
        target = (root / path.lstrip("/")).resolve()
        if path in ("", "/"):
            target = root / "index.html"
        if root not in target.parents and target != root:
            return file_response(403, "Forbidden", b"forbidden\n", "text/plain")
        if not target.is_file() or target.suffix not in _STATIC_TYPES:
            return file_response(404, "Not Found", b"not found\n", "text/plain")
        return file_response(200, "OK", target.read_bytes(), _STATIC_TYPES[target.suffix])

    return respond


async def serve(config: SessionConfig, host: str, port: int, on_ready=None, ui_dir=None) -> None:
    """Accept connections until cancelled; each gets an isolated session.

    ``on_ready`` is called with the bound port once listening, which lets
    callers pass port 0 and discover the ephemeral port. With ``ui_dir``
    set, plain HTTP requests on the same port serve the client assets.
    """
    from websockets.asyncio.server import serve as ws_serve
    from websockets.exceptions import ConnectionClosed

    async def handler(ws) -> None:
        try:
            await run_session(ws, config)
        except ConnectionClosed:
            pass

    process_request = _static_file_responder(ui_dir) if ui_dir else None
    async with ws_serve(handler, host, port, process_request=process_request) as server:
        bound = server.sockets[0].getsockname()[1]
        logger.info("listening on ws://%s:%d", host, bound)
        if on_ready is not None:
            on_ready(bound)
        await server.serve_forever()
