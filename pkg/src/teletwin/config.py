"""YAML configuration files for trials, experiments, and live sessions.

Every section is optional and falls back to the package defaults, so a
minimal trial file can be just a strategy and a seed. The same scene and
channel sections are shared between trial and session configs.

Example trial file::

    strategy: replay
    seed: 7
    max_duration: 300
    channel: {mean_up: 3.2, std_up: 0.15, mean_down: 0.8, std_down: 0.1}
    controller: {tick_rate: 100, replay_stride: 2}
    operator:
      max_speed: 0.02
      reacquisition_delay: 0.5
      jaw_action_time: 0.3
    scene:
      capture_radius: 0.02
      grasp: {grasp_radius: 0.003, jaw_close_threshold: 0.2, jaw_open_threshold: 0.5}
      posts:
        - {id: L1, position: [-0.04, -0.025, 0.01], side: left}
        # ...
      pegs:
        - {id: p1, post: L1}

A session file accepts the same ``channel``/``controller``/``scene``
sections plus ``service:`` (broadcast_rate, time_scale, bind, seed,
horizon, manual_link) and ``camera:`` (intrinsics and pose_in_base).
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .channel import ChannelParams
from .controller import ControllerConfig, StrategyKind
from .geometry import CameraIntrinsics, Pose, RigidTransform, Rotation, Vec3
from .harness import TrialConfig
from .operator import OperatorParams
from .scene import GraspParams, Post, SceneLayout, Side, default_layout
from .service import CameraSetup, SessionConfig, default_camera

DEFAULT_BIND = "127.0.0.1:8765"


def _vec(value) -> Vec3:
    if isinstance(value, dict):
        return Vec3(float(value["x"]), float(value["y"]), float(value["z"]))
    x, y, z = value
    return Vec3(float(x), float(y), float(z))


def _quat(value) -> Rotation:
    if isinstance(value, dict):
        return Rotation(float(value["w"]), float(value["x"]), float(value["y"]), float(value["z"]))
    w, x, y, z = value
    return Rotation(float(w), float(x), float(y), float(z))


def channel_from_dict(d: dict | None) -> ChannelParams:
    if not d:
        return ChannelParams()
    return ChannelParams(
        mean_up=float(d.get("mean_up", 3.2)),
        std_up=float(d.get("std_up", 0.15)),
        mean_down=float(d.get("mean_down", 0.8)),
        std_down=float(d.get("std_down", 0.1)),
        min_period=float(d.get("min_period", 0.05)),
    )


def controller_from_dict(d: dict | None) -> ControllerConfig:
    if not d:
        return ControllerConfig()
    return ControllerConfig(
        tick_rate=float(d.get("tick_rate", 100.0)),
        replay_stride=int(d.get("replay_stride", 2)),
        buffer_cap=int(d["buffer_cap"]) if "buffer_cap" in d else None,
        remote_speed_limit=float(d["remote_speed_limit"]) if "remote_speed_limit" in d else None,
    )


def operator_from_dict(d: dict | None) -> OperatorParams:
    if not d:
        return OperatorParams()
    return OperatorParams(
        max_speed=float(d.get("max_speed", 0.02)),
        waypoint_tolerance=float(d.get("waypoint_tolerance", 0.001)),
        reacquisition_delay=float(d.get("reacquisition_delay", 0.5)),
        jaw_action_time=float(d.get("jaw_action_time", 0.3)),
    )


def layout_from_dict(d: dict | None) -> SceneLayout:
    if not d:
        return default_layout()
    base = default_layout()
    grasp = base.grasp
    if "grasp" in d:
        g = d["grasp"]
        grasp = GraspParams(
            grasp_radius=float(g.get("grasp_radius", 0.003)),
            jaw_close_threshold=float(g.get("jaw_close_threshold", 0.2)),
            jaw_open_threshold=float(g.get("jaw_open_threshold", 0.5)),
        )
    posts = base.posts
    if "posts" in d:
        posts = tuple(
            Post(str(p["id"]), _vec(p["position"]), Side(p["side"])) for p in d["posts"]
        )
    pegs = base.peg_start_posts
    if "pegs" in d:
        pegs = tuple((str(p["id"]), str(p["post"])) for p in d["pegs"])
    return SceneLayout(
        posts=posts,
        peg_start_posts=pegs,
        capture_radius=float(d.get("capture_radius", base.capture_radius)),
        plane_height=float(d.get("plane_height", base.plane_height)),
        grasp=grasp,
        grasp_offset=Pose(_vec(d["grasp_offset"]), Rotation.identity()) if "grasp_offset" in d else base.grasp_offset,
        tool_start=_vec(d["tool_start"]) if "tool_start" in d else base.tool_start,
        approach_height=float(d.get("approach_height", base.approach_height)),
    )


def camera_from_dict(d: dict | None) -> CameraSetup:
    if not d:
        return default_camera()
    i = d.get("intrinsics", {})
    intrinsics = CameraIntrinsics(
        fx=float(i.get("fx", 800.0)),
        fy=float(i.get("fy", 800.0)),
        cx=float(i.get("cx", 480.0)),
        cy=float(i.get("cy", 270.0)),
        width=int(i.get("width", 960)),
        height=int(i.get("height", 540)),
    )
    if "pose_in_base" in d:
        p = d["pose_in_base"]
        pose_in_base = RigidTransform("camera", "base", _quat(p["orientation"]), _vec(p["position"]))
    else:
        pose_in_base = default_camera().pose_in_base
    return CameraSetup(intrinsics, pose_in_base)


def trial_config_from_dict(d: dict) -> TrialConfig:
    return TrialConfig(
        strategy=StrategyKind(d.get("strategy", "replay")),
        channel=channel_from_dict(d.get("channel")),
        controller=controller_from_dict(d.get("controller")),
        layout=layout_from_dict(d.get("scene")),
        operator=operator_from_dict(d.get("operator")),
        seed=int(d.get("seed", 0)),
        max_duration=float(d.get("max_duration", 600.0)),
    )


def session_config_from_dict(d: dict) -> tuple[SessionConfig, str]:
    """Build a session config; returns (config, bind_address)."""
    service = d.get("service", {}) or {}
    manual_link = bool(service.get("manual_link", False))
    channel = None if manual_link else channel_from_dict(d.get("channel"))
    config = SessionConfig(
        strategy=StrategyKind(d.get("strategy", "replay")),
        channel=channel,
        controller=controller_from_dict(d.get("controller")),
        layout=layout_from_dict(d.get("scene")),
        camera=camera_from_dict(d.get("camera")),
        broadcast_rate=float(service.get("broadcast_rate", 30.0)),
        time_scale=float(service.get("time_scale", 1.0)),
        schedule_seed=int(service.get("seed", 0)),
        schedule_horizon=float(service.get("horizon", 3600.0)),
    )
    return config, str(service.get("bind", DEFAULT_BIND))


def load_trial_config(path: str | Path) -> TrialConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return trial_config_from_dict(data)


def load_session_config(path: str | Path) -> tuple[SessionConfig, str]:
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return session_config_from_dict(data)
