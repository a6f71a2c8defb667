"""Feature space of a cylindrical peg relative to its hole.

A configuration is described by five features ``(d_x, d_y, l, theta_x, theta_y)``:
lateral offsets of the peg axis at half the insertion depth, the insertion
depth measured along the peg axis, and the two plane tilts. ``theta_y`` is the
tilt seen in the X-O-Z plane (the peg top leans toward +X for positive values)
and pairs with ``d_x``; ``theta_x`` is the Y-O-Z counterpart and pairs with
``d_y``.

All quantities are SI (m, rad).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError

FEATURE_NAMES = ("d_x", "d_y", "l", "theta_x", "theta_y")
HALF_PI = math.pi / 2


@dataclass(frozen=True)
class FeatureVector:
    d_x: float = 0.0
    d_y: float = 0.0
    l: float = 0.0
    theta_x: float = 0.0
    theta_y: float = 0.0

    def __post_init__(self):
        if self.l < 0:
            raise DomainError(f"insertion depth must be >= 0, got {self.l}")
        if abs(self.theta_x) >= HALF_PI or abs(self.theta_y) >= HALF_PI:
            raise DomainError("plane tilts must satisfy |theta| < pi/2")

    def as_array(self) -> np.ndarray:
        return np.array([self.d_x, self.d_y, self.l, self.theta_x, self.theta_y])

    @classmethod
    def from_array(cls, a) -> "FeatureVector":
        a = np.asarray(a, dtype=float)
        return cls(*(float(v) for v in a[:5]))

    def replace(self, **kw) -> "FeatureVector":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return FeatureVector(**vals)


@dataclass(frozen=True)
class PolarTilt:
    """Axis tilt as a vertical angle ``theta`` and a horizontal angle ``phi``."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta < HALF_PI:
            raise DomainError(f"vertical angle must lie in [0, pi/2), got {self.theta}")


def to_axis_angles(tilt: PolarTilt) -> tuple[float, float]:
    """(theta, phi) -> (theta_x, theta_y) with theta_x = atan(tan(theta) cos(phi))."""
    if tilt.theta >= HALF_PI:
        raise DomainError("vertical angle must be < pi/2")
    t = math.tan(tilt.theta)
    return math.atan(t * math.cos(tilt.phi)), math.atan(t * math.sin(tilt.phi))


def from_axis_angles(theta_x: float, theta_y: float) -> PolarTilt:
    """Inverse of :func:`to_axis_angles`; ``phi = 0`` when the tilt vanishes."""
    if abs(theta_x) >= HALF_PI or abs(theta_y) >= HALF_PI:
        raise DomainError("axis angles must satisfy |theta| < pi/2")
    tx, ty = math.tan(theta_x), math.tan(theta_y)
    theta = math.atan(math.hypot(tx, ty))
    phi = math.atan2(ty, tx) if theta > 0.0 else 0.0
    if phi == -math.pi:
        phi = math.pi
    return PolarTilt(theta, phi)


def axis_tilt(x: FeatureVector) -> PolarTilt:
    """Physical tilt of the peg axis with ``phi`` measured from +X toward +Y.

    The X-O-Z tilt ``theta_y`` is the component along X, so the pair is fed to
    the conversion with the plane tilts swapped.
    """
    return from_axis_angles(x.theta_y, x.theta_x)


def axis_direction(x: FeatureVector) -> np.ndarray:
    """Unit vector along the peg axis, pointing from the tip into the peg body."""
    u = np.array([math.tan(x.theta_y), math.tan(x.theta_x), 1.0])
    return u / np.linalg.norm(u)


def decompose(x: FeatureVector) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Split into the X-O-Z triple (d_x, l, theta_y) and the Y-O-Z triple (d_y, l, theta_x)."""
    return (x.d_x, x.l, x.theta_y), (x.d_y, x.l, x.theta_x)


def recompose(xoz, yoz) -> FeatureVector:
    d_x, l, theta_y = xoz
    d_y, l2, theta_x = yoz
    if l != l2:
        raise DomainError("planes disagree on insertion depth")
    return FeatureVector(d_x, d_y, l, theta_x, theta_y)


@dataclass(frozen=True)
class HoleFrame:
    """Frame {H} on the top surface of the hole, Z along the hole axis pointing out."""

    origin: tuple = (0.0, 0.0, 0.0)
    z_axis: tuple = (0.0, 0.0, 1.0)
    x_axis: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        z = np.asarray(self.z_axis, dtype=float)
        x = np.asarray(self.x_axis, dtype=float)
        if (
            abs(np.dot(z, z) - 1.0) > 1e-12
            or abs(np.dot(x, x) - 1.0) > 1e-12
            or abs(np.dot(x, z)) > 1e-12
        ):
            raise DomainError("hole frame axes must be orthonormal")

    @property
    def rotation(self) -> np.ndarray:
        z = np.asarray(self.z_axis, dtype=float)
        x = np.asarray(self.x_axis, dtype=float)
        return np.column_stack([x, np.cross(z, x), z])

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.origin
        return T


def _rotation_z_to(u: np.ndarray) -> np.ndarray:
    # minimal rotation taking e_z onto u (u_z > 0 by construction)
    a, b, c = u
    v = np.array([-b, a, 0.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def pose_from_feature(x: FeatureVector, frame: HoleFrame = HoleFrame()) -> np.ndarray:
    """Homogeneous pose of the peg tip frame in world coordinates.

    The tip frame has its origin at the centre of the peg end face and its Z
    axis along the peg axis, into the body.
    """
    u = axis_direction(x)
    half = 0.5 * x.l
    mid = np.array([x.d_x, x.d_y, -half * u[2]])
    tip = mid - half * u
    local = np.eye(4)
    local[:3, :3] = _rotation_z_to(u)
    local[:3, 3] = tip
    return frame.matrix @ local


def feature_from_pose(pose: np.ndarray, frame: HoleFrame = HoleFrame()) -> FeatureVector:
    """Recover the five features from a peg tip pose.

    Before the tip reaches the top surface ``l`` is clamped to zero and the
    offsets are read where the peg axis crosses the surface.
    """
    pose = np.asarray(pose, dtype=float)
    local = np.linalg.solve(frame.matrix, pose)
    tip = local[:3, 3]
    u = local[:3, 2] / np.linalg.norm(local[:3, 2])
    if u[2] <= 1e-9:
        raise DomainError("peg axis is parallel to (or points away from) the hole top plane")
    theta_y = math.atan(u[0] / u[2])
    theta_x = math.atan(u[1] / u[2])
    depth = -tip[2]
    if depth > 0.0:
        l = depth / u[2]
        p = tip + 0.5 * l * u
    else:
        l = 0.0
        p = tip + (depth / u[2]) * u
    return FeatureVector(float(p[0]), float(p[1]), float(l), theta_x, theta_y)
