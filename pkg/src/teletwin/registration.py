"""Environment-to-base registration and camera projection for the overlay.

The environment transform is estimated from digitized point pairs with the
closed-form least-squares rigid fit (centroid alignment plus SVD of the
cross-covariance, reflection-corrected), since correspondence is given by
the digitizing procedure. The camera extrinsic is loaded from configuration
rather than estimated; only the pinhole projection lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CameraIntrinsics, RigidTransform, Rotation, Vec3, transform_point
from .scene import PegLocation, SceneState, peg_position

DEGENERACY_TOL = 1e-9
PEG_OUTLINE_RADIUS = 0.004
PEG_OUTLINE_SEGMENTS = 12
JAW_SEGMENT_LENGTH = 0.01


class DegenerateGeometryError(ValueError):
    """Point pairs do not pin down a rigid transform (collinear or duplicated)."""


class BehindCameraError(ValueError):
    """Projection requested for a point at nonpositive camera depth."""


@dataclass(frozen=True)
class PointPairSet:
    """Corresponding landmarks: model frame vs digitized robot-base frame."""

    model_points: tuple[Vec3, ...]
    robot_points: tuple[Vec3, ...]

    def __post_init__(self) -> None:
        if len(self.model_points) != len(self.robot_points):
            raise ValueError("model and robot point lists must have equal length")
        if len(self.model_points) < 3:
            raise ValueError("at least 3 point pairs are required")
        pts = np.array([p.as_tuple() for p in self.model_points])
        centered = pts - pts.mean(axis=0)
        sv = np.linalg.svd(centered, compute_uv=False)
        # Collinear (and duplicated) sets have a vanishing second singular
        # value; planar sets are fine for a reflection-corrected rigid fit.
        if sv[1] <= DEGENERACY_TOL:
            raise DegenerateGeometryError(
                f"model points are collinear or duplicated (second singular value {sv[1]:.3e})"
            )


@dataclass(frozen=True)
class RegistrationResult:
    transform: RigidTransform  # environment -> base
    fre_rms: float

    def __post_init__(self) -> None:
        if self.fre_rms < 0:
            raise ValueError("fre_rms must be nonnegative")


def register_paired_points(
    pairs: PointPairSet,
    from_frame: str = "environment",
    to_frame: str = "base",
) -> RegistrationResult:
    """Least-squares rigid fit mapping model points onto robot points."""
    model = np.array([p.as_tuple() for p in pairs.model_points])
    robot = np.array([p.as_tuple() for p in pairs.robot_points])
    model_centroid = model.mean(axis=0)
    robot_centroid = robot.mean(axis=0)
    h = (model - model_centroid).T @ (robot - robot_centroid)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    t = robot_centroid - rot @ model_centroid
    residuals = (model @ rot.T + t) - robot
    fre_rms = float(np.sqrt(np.mean(np.sum(residuals**2, axis=1))))
    transform = RigidTransform(from_frame, to_frame, Rotation.from_matrix(rot), Vec3(*t))
    return RegistrationResult(transform, fre_rms)


def project_point(
    extrinsic: RigidTransform,
    intrinsics: CameraIntrinsics,
    p_base: Vec3,
) -> tuple[float, float]:
    """Pinhole projection of a base-frame point; `extrinsic` maps base to camera."""
    pc = transform_point(extrinsic, p_base)
    if pc.z <= 0.0:
        raise BehindCameraError(f"point at camera depth {pc.z} cannot be projected")
    u = intrinsics.fx * pc.x / pc.z + intrinsics.cx
    v = intrinsics.fy * pc.y / pc.z + intrinsics.cy
    return (u, v)


@dataclass(frozen=True)
class OverlayPrimitive:
    """Labeled 2-D primitive for the twin overlay."""

    label: str
    kind: str  # "point" | "segment" | "polygon"
    points: tuple[tuple[float, float], ...]


def _project_all(extrinsic, intrinsics, points: list[Vec3]) -> tuple[tuple[float, float], ...] | None:
    """Project a point list, or None if any point sits behind the camera."""
    out = []
    for p in points:
        try:
            out.append(project_point(extrinsic, intrinsics, p))
        except BehindCameraError:
            return None
    return tuple(out)


def overlay_silhouette(
    scene: SceneState,
    extrinsic: RigidTransform,
    intrinsics: CameraIntrinsics,
) -> list[OverlayPrimitive]:
    """Tool tip, jaw direction, and held-peg outline as labeled pixel primitives.

    Entities behind the camera are omitted rather than raised; the overlay
    simply has nothing to draw for them.
    """
    primitives: list[OverlayPrimitive] = []
    if scene.tool is None:
        return primitives

    tip = scene.tool.pose.position
    tip_px = _project_all(extrinsic, intrinsics, [tip])
    if tip_px is not None:
        primitives.append(OverlayPrimitive("tool_tip", "point", tip_px))

    jaw_end = tip + scene.tool.pose.orientation.apply(Vec3(0.0, 0.0, JAW_SEGMENT_LENGTH))
    seg_px = _project_all(extrinsic, intrinsics, [tip, jaw_end])
    if seg_px is not None:
        primitives.append(OverlayPrimitive("jaw", "segment", seg_px))

    for peg in scene.pegs:
        if peg.location is not PegLocation.HELD:
            continue
        center = peg_position(scene, peg)
        ring = [
            center
            + Vec3(
                PEG_OUTLINE_RADIUS * math.cos(2 * math.pi * k / PEG_OUTLINE_SEGMENTS),
                PEG_OUTLINE_RADIUS * math.sin(2 * math.pi * k / PEG_OUTLINE_SEGMENTS),
                0.0,
            )
            for k in range(PEG_OUTLINE_SEGMENTS)
        ]
        ring_px = _project_all(extrinsic, intrinsics, ring)
        if ring_px is not None:
            primitives.append(OverlayPrimitive(f"held_peg:{peg.id}", "polygon", ring_px))
    return primitives
