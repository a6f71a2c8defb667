"""Contact-state labels from features (ground truth) and from responses.

Per plane there are nine states. ``P`` is planar contact, ``D`` double-edge
contact; the subscript is the sign of the lateral offset and the bar marks a
negative tilt. In the response plane ``(u, v) = (F/F_z, M/(R F_z))`` the
``D_0`` states lie on the ``v`` axis, ``P_1``/``P_-1`` on a line through the
origin whose slope falls with depth, ``P_0`` at the origin, and the four
remaining ``D`` states fill the sectors between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .contact import DEFAULT_QUADRATURE, Geometry, QuadratureSpec, respond
from .errors import DomainError, InconsistentWrench
from .geometry import FeatureVector

XOZ = "XOZ"
YOZ = "YOZ"

# sign of M for a positive tilt with zero offset, read off the contact model
D0_MOMENT_SIGN = 1.0


class ContactState(str, Enum):
    P_0 = "P_0"
    P_1 = "P_1"
    P_m1 = "P_-1"
    D_0 = "D_0"
    Dbar_0 = "Dbar_0"
    D_1 = "D_1"
    D_m1 = "D_-1"
    Dbar_1 = "Dbar_1"
    Dbar_m1 = "Dbar_-1"

    @property
    def side(self) -> int:
        """Sign of the lateral offset encoded in the subscript."""
        if self.value.endswith("-1"):
            return -1
        return 1 if self.value.endswith("_1") else 0

    @property
    def is_planar(self) -> bool:
        return self.value.startswith("P")

    @property
    def negative_tilt(self) -> bool:
        return self.value.startswith("Dbar")

    def mirror(self) -> "ContactState":
        """Label after negating both offset and tilt."""
        if self.is_planar:
            return make_state(True, -self.side, False)
        return make_state(False, -self.side, not self.negative_tilt)

    def __str__(self) -> str:
        return self.value


def make_state(planar: bool, side: int, negative_tilt: bool = False) -> ContactState:
    suffix = {0: "0", 1: "1", -1: "-1"}[side]
    if planar:
        return ContactState("P_" + suffix)
    return ContactState(("Dbar_" if negative_tilt else "D_") + suffix)


@dataclass(frozen=True)
class BoundaryTolerances:
    """Dead zone ``eps_force`` (N) for zero responses and half-width
    ``eps_angle`` (rad) of the planar-contact band in the (u, v) plane."""

    eps_force: float = 0.05
    eps_angle: float = math.radians(2.0)

    def __post_init__(self):
        if not (self.eps_force > 0 and self.eps_angle > 0):
            raise ValueError("tolerances must be > 0")


DEFAULT_TOLERANCES = BoundaryTolerances()


def _sign(v: float) -> int:
    return int(v > 0) - int(v < 0)


def classify_features(plane: str, d: float, l: float, theta: float, g: Geometry) -> ContactState:
    """Ground-truth label of one plane from its offset, depth and tilt.

    Clearance fit: no contact inside the rhombus ``|d| + l|theta|/2 <= R - r``.
    Interference fit: only the exact centre is contact-free.
    """
    if plane not in (XOZ, YOZ):
        raise ValueError(f"unknown plane {plane!r}")
    if l <= 0:
        raise DomainError("feature labels need a positive insertion depth")
    if g.is_clearance_fit:
        if abs(d) + 0.5 * l * abs(theta) <= g.R - g.r:
            return ContactState.P_0
    elif d == 0 and theta == 0:
        return ContactState.P_0
    if theta == 0:
        return make_state(True, _sign(d))
    return make_state(False, _sign(d), theta < 0)


def boundary_slope(l: float, g: Geometry) -> float:
    """Slope of the planar-contact line in (F/F_z, M/(R F_z)) coordinates."""
    if l < 0:
        raise DomainError("insertion depth must be >= 0")
    return (-0.5 * l + g.L + g.H + g.mu * g.R) / g.R


def response_coordinates(F_lat: float, F_z: float, M: float, g: Geometry) -> tuple[float, float]:
    if F_z <= 0:
        return float("nan"), float("nan")
    return F_lat / F_z, M / (g.R * F_z)


def classify_responses(
    plane: str,
    F_lat: float,
    F_z: float,
    M: float,
    l: float,
    g: Geometry,
    tol: BoundaryTolerances = DEFAULT_TOLERANCES,
    moment_sign: float = D0_MOMENT_SIGN,
    strict: bool = True,
) -> ContactState:
    """Label one plane from its lateral force, axial force and moment.

    Boundary ties go to the lower-dimensional state. With ``strict=False`` a
    lateral response under an axial force in ``(0, eps_force]`` is labelled
    by its sector instead of raising.
    """
    if plane not in (XOZ, YOZ):
        raise ValueError(f"unknown plane {plane!r}")
    eps = tol.eps_force
    if abs(F_lat) <= eps and abs(M) <= eps * g.R:
        return ContactState.P_0
    if F_z <= (eps if strict else 0.0):
        raise InconsistentWrench(
            f"{plane}: lateral response (F={F_lat:.4g}, M={M:.4g}) with axial force {F_z:.4g} N"
        )
    if abs(F_lat) <= eps:
        return ContactState.D_0 if moment_sign * M > 0 else ContactState.Dbar_0
    u, v = response_coordinates(F_lat, F_z, M, g)
    slope = boundary_slope(l, g)
    side = _sign(u)
    ex, ey = side, side * slope
    off_line = math.atan2(ex * v - ey * u, ex * u + ey * v)
    if abs(off_line) <= tol.eps_angle:
        return make_state(True, side)
    positive_tilt = moment_sign * (v - slope * u) > 0
    return make_state(False, side, not positive_tilt)


def plane_responses(w, plane: str):
    """(F_lat, F_z, M) of one plane from a response 5-vector."""
    F_x, F_y, F_z, M_x, M_y = (float(c) for c in w)
    return (F_x, F_z, M_y) if plane == XOZ else (F_y, F_z, M_x)


def plane_features(x: FeatureVector, plane: str):
    """(d, l, theta) of one plane."""
    return (x.d_x, x.l, x.theta_y) if plane == XOZ else (x.d_y, x.l, x.theta_x)


def classify_wrench(w, l: float, g: Geometry, tol: BoundaryTolerances = DEFAULT_TOLERANCES):
    """Spatial response state as an (XOZ, YOZ) pair."""
    return tuple(classify_responses(p, *plane_responses(w, p), l, g, tol) for p in (XOZ, YOZ))


def classify_feature_vector(x: FeatureVector, g: Geometry):
    return tuple(classify_features(p, *plane_features(x, p), g) for p in (XOZ, YOZ))


@dataclass(frozen=True)
class PlaneAgreement:
    plane: str
    feature_state: ContactState
    response_state: ContactState
    u: float
    v: float

    @property
    def match(self) -> bool:
        return self.feature_state is self.response_state


def consistency_check(
    x: FeatureVector,
    g: Geometry,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    tol: BoundaryTolerances = DEFAULT_TOLERANCES,
) -> list[PlaneAgreement]:
    """Compare feature-side and response-side labels in both planes."""
    w = respond(x, g, q).as_array()
    out = []
    for plane in (XOZ, YOZ):
        F_lat, F_z, M = plane_responses(w, plane)
        u, v = response_coordinates(F_lat, F_z, M, g)
        out.append(
            PlaneAgreement(
                plane,
                classify_features(plane, *plane_features(x, plane), g),
                classify_responses(plane, F_lat, F_z, M, x.l, g, tol),
                u,
                v,
            )
        )
    return out


def calibrate_moment_sign(g: Geometry, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Sign of ``M_y`` at a reference ``D_0`` point (zero offset, positive tilt)."""
    l = 0.5 * g.L
    theta = 4.0 * abs(g.R - g.r) / l + 1e-3
    w = respond(FeatureVector(0.0, 0.0, l, 0.0, theta), g, q)
    if w.M_y == 0:
        raise DomainError("reference point produced no moment")
    return math.copysign(1.0, w.M_y)
