"""Frames, poses, and rigid transforms shared by the rest of the package.

Orientations are stored as unit quaternions and renormalized on every
construction, so long command streams cannot drift off the unit sphere.
Frame names are plain strings checked at composition time, which turns
transform-chain wiring mistakes into loud errors instead of silently wrong
geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

GEOM_TOL = 1e-9
EXACT_TOL = 1e-12


class FrameMismatchError(ValueError):
    """Transform composed or inverted across mismatched frame labels."""


@dataclass(frozen=True, slots=True)
class Vec3:
    """Point or displacement, meters. Components must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"vector components must be finite, got ({self.x}, {self.y}, {self.z})")

    @classmethod
    def zero(cls) -> "Vec3":
        return cls(0.0, 0.0, 0.0)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        dz = self.z - other.z
        return math.sqrt(dx * dx + dy * dy + dz * dz)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class Rotation:
    """Unit quaternion (w, x, y, z), renormalized on construction."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(n) or n < 1e-12:
            raise ValueError(f"quaternion norm {n} too small to normalize")
        if n != 1.0:
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_axis_angle(cls, axis: Vec3, angle: float) -> "Rotation":
        n = axis.norm()
        if n < 1e-12:
            raise ValueError("rotation axis must be nonzero")
        half = 0.5 * angle
        s = math.sin(half) / n
        return cls(math.cos(half), axis.x * s, axis.y * s, axis.z * s)

    def __mul__(self, other: "Rotation") -> "Rotation":
        """Hamilton product; self applied after other."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Rotation(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def inverse(self) -> "Rotation":
        return Rotation(self.w, -self.x, -self.y, -self.z)

    def apply(self, v: Vec3) -> Vec3:
        # v' = v + 2 w (q x v) + 2 q x (q x v), with q the vector part
        tx = 2.0 * (self.y * v.z - self.z * v.y)
        ty = 2.0 * (self.z * v.x - self.x * v.z)
        tz = 2.0 * (self.x * v.y - self.y * v.x)
        return Vec3(
            v.x + self.w * tx + self.y * tz - self.z * ty,
            v.y + self.w * ty + self.z * tx - self.x * tz,
            v.z + self.w * tz + self.x * ty - self.y * tx,
        )

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic angle in radians between the two orientations.

        Computed from the relative quaternion with atan2, which stays
        accurate for angles far below the acos resolution floor.
        """
        rel = self.inverse() * other
        v = math.sqrt(rel.x * rel.x + rel.y * rel.y + rel.z * rel.z)
        return 2.0 * math.atan2(v, abs(rel.w))

    def slerp(self, other: "Rotation", s: float) -> "Rotation":
        """Shortest-arc spherical interpolation, s in [0, 1]."""
        dot = self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
        ow, ox, oy, oz = other.w, other.x, other.y, other.z
        if dot < 0.0:
            dot, ow, ox, oy, oz = -dot, -ow, -ox, -oy, -oz
        if dot > 1.0 - 1e-10:
            # Nearly parallel; linear blend then renormalize.
            return Rotation(
                self.w + s * (ow - self.w),
                self.x + s * (ox - self.x),
                self.y + s * (oy - self.y),
                self.z + s * (oz - self.z),
            )
        theta = math.acos(min(1.0, dot))
        sin_theta = math.sin(theta)
        ka = math.sin((1.0 - s) * theta) / sin_theta
        kb = math.sin(s * theta) / sin_theta
        return Rotation(
            ka * self.w + kb * ow,
            ka * self.x + kb * ox,
            ka * self.y + kb * oy,
            ka * self.z + kb * oz,
        )

    def to_matrix(self) -> tuple[tuple[float, float, float], ...]:
        w, x, y, z = self.w, self.x, self.y, self.z
        return (
            (1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)),
            (2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)),
            (2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)),
        )

    @classmethod
    def from_matrix(cls, m) -> "Rotation":
        """Quaternion from a 3x3 rotation matrix (any row-indexable)."""
        tr = m[0][0] + m[1][1] + m[2][2]
        if tr > 0.0:
            s = math.sqrt(tr + 1.0) * 2.0
            return cls((0.25 * s), (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s)
        if m[0][0] > m[1][1] and m[0][0] > m[2][2]:
            s = math.sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0
            return cls((m[2][1] - m[1][2]) / s, 0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s)
        if m[1][1] > m[2][2]:
            s = math.sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0
            return cls((m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s)
        s = math.sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0
        return cls((m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s)


@dataclass(frozen=True, slots=True)
class Pose:
    """Cartesian tooltip goal: position plus orientation."""

    position: Vec3
    orientation: Rotation

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Vec3.zero(), Rotation.identity())


def compose_pose(a: Pose, b: Pose) -> Pose:
    """Pose b expressed relative to pose a (a applied after b)."""
    return Pose(a.position + a.orientation.apply(b.position), a.orientation * b.orientation)


@dataclass(frozen=True, slots=True)
class CameraIntrinsics:
    """Pinhole parameters in pixels. Distortion is intentionally not modeled."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True, slots=True)
class RigidTransform:
    """Rigid map taking points in `from_frame` to points in `to_frame`."""

    from_frame: str
    to_frame: str
    rotation: Rotation
    translation: Vec3

    @classmethod
    def identity(cls, frame: str) -> "RigidTransform":
        return cls(frame, frame, Rotation.identity(), Vec3.zero())


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """a after b: maps b.from_frame points into a.to_frame."""
    if a.from_frame != b.to_frame:
        raise FrameMismatchError(
            f"cannot compose {a.to_frame}<-{a.from_frame} with {b.to_frame}<-{b.from_frame}"
        )
    return RigidTransform(
        b.from_frame,
        a.to_frame,
        a.rotation * b.rotation,
        a.translation + a.rotation.apply(b.translation),
    )


def invert(t: RigidTransform) -> RigidTransform:
    rot_inv = t.rotation.inverse()
    return RigidTransform(t.to_frame, t.from_frame, rot_inv, -rot_inv.apply(t.translation))


def transform_point(t: RigidTransform, p: Vec3) -> Vec3:
    return t.rotation.apply(p) + t.translation


def interpolate_pose(a: Pose, b: Pose, s: float) -> Pose:
    """Linear position blend and shortest-arc orientation blend, s in [0, 1]."""
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation parameter must be in [0, 1], got {s}")
    pos = Vec3(
        a.position.x + s * (b.position.x - a.position.x),
        a.position.y + s * (b.position.y - a.position.y),
        a.position.z + s * (b.position.z - a.position.z),
    )
    return Pose(pos, a.orientation.slerp(b.orientation, s))
