"""Feature-based compliance control and the admittance baseline.

Both laws run the same second-order compliance filter

    M_d x_d'' + D_d x_d' + K_d x_d = A F_ext

discretised with backward differences. FBCC rotates the wrench through the
boundary-aligned direction matrix ``A`` and accumulates the adjustment into
the reference; the admittance baseline uses the plain moment channel and
applies ``x_d`` as a one-shot offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from enum import Enum

import numpy as np

from .contact import Geometry, ResponseVector
from .errors import ConfigError, PegSimError
from .geometry import FeatureVector

# index of each feature in the 5-vectors
DX, DY, L_, TX, TY = range(5)
FX, FY, FZ, MX, MY = range(5)

# sign of the Y-O-Z tilt row, fixed by calibrate_yoz_sign
YOZ_SIGN = 1.0

# (M_dp, K_dp, M_do, K_do, M_dl, K_dl); D_d = sqrt(M_d K_d)
PARAM_SETS = {
    "1": (1e5, 1e7, 1e1, 1e3, 1e10, 1e12),
    "2": (1e4, 1e6, 1e0, 1e2, 1e10, 1e12),
    "3": (1e4, 1e6, 1e1, 1e3, 1e10, 1e12),
    "4": (1e4, 1e6, 1e2, 1e4, 1e10, 1e12),
    "5": (1e3, 1e5, 1e-1, 1e1, 1e10, 1e12),
}


@dataclass(frozen=True)
class ComplianceParams:
    """Inertia, damping and stiffness gains for the position (p), orientation (o)
    and insertion (l) features."""

    M_dp: float
    M_do: float
    M_dl: float
    D_dp: float
    D_do: float
    D_dl: float
    K_dp: float
    K_do: float
    K_dl: float

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not v > 0:
                raise ConfigError(f"compliance gain {name} must be > 0")

    @classmethod
    def table(cls, label: str | int = "3") -> "ComplianceParams":
        try:
            m_p, k_p, m_o, k_o, m_l, k_l = PARAM_SETS[str(label)]
        except KeyError:
            raise ConfigError(f"unknown compliance parameter set {label!r}") from None
        return cls(
            M_dp=m_p, M_do=m_o, M_dl=m_l,
            D_dp=math.sqrt(m_p * k_p), D_do=math.sqrt(m_o * k_o), D_dl=math.sqrt(m_l * k_l),
            K_dp=k_p, K_do=k_o, K_dl=k_l,
        )

    def _diag(self, p, o, l):
        return np.array([p, p, l, o, o])

    @cached_property
    def M(self) -> np.ndarray:
        return self._diag(self.M_dp, self.M_do, self.M_dl)

    @cached_property
    def D(self) -> np.ndarray:
        return self._diag(self.D_dp, self.D_do, self.D_dl)

    @cached_property
    def K(self) -> np.ndarray:
        return self._diag(self.K_dp, self.K_do, self.K_dl)


def gamma(l: float, g: Geometry) -> float:
    """Tilt of the planar-contact boundary in the (F/F_z, M/(R F_z)) plane."""
    if l < 0:
        raise ValueError("insertion depth must be >= 0")
    return math.atan((-0.5 * l + g.L + g.H + g.mu * g.R) / g.R)


def direction_matrix(l: float, g: Geometry, yoz_sign: float = 1.0, gamma_value: float | None = None) -> np.ndarray:
    """5x5 map from (F_x, F_y, F_z, M_x, M_y) to the feature channels.

    The tilt rows combine the lateral force and the moment of their plane so
    that a wrench lying on the planar-contact boundary produces no tilt
    correction.
    """
    gm = gamma(l, g) if gamma_value is None else gamma_value
    sg, cg = math.sin(gm), math.cos(gm)
    A = np.zeros((5, 5))
    A[DX, FX] = A[DY, FY] = A[L_, FZ] = 1.0
    A[TX, FY] = -yoz_sign * sg
    A[TX, MX] = yoz_sign * cg / g.R
    A[TY, FX] = -sg
    A[TY, MY] = cg / g.R
    return A


class Termination(str, Enum):
    CONTINUE = "continue"
    SUCCESS = "success"
    FORCE_ABORT = "force_abort"


@dataclass(frozen=True)
class ControllerState:
    """Reference, adjustment history and loop settings threaded through each step.

    ``x_d_limit`` is the per-feature deadband of the reference integrator and
    ``integral_time`` its time constant: each tick subtracts ``x_d*dt/integral_time``
    from the reference, so ``integral_time == dt`` gives the plain per-tick
    update ``x_rfr -= x_d``. ``force_limit``/``moment_limit`` bound the wrench
    before the run aborts.
    """

    x_rfr: np.ndarray
    x_d_prev: np.ndarray = field(default_factory=lambda: np.zeros(5))
    x_d_prev2: np.ndarray = field(default_factory=lambda: np.zeros(5))
    dt: float = 1e-3
    x_d_limit: np.ndarray = field(default_factory=lambda: np.array([1e-8, 1e-8, 1e-8, 1e-6, 1e-6]))
    force_limit: float = 500.0
    moment_limit: float = 10.0
    v_feed: float = 5e-3
    depth_target: float = 10e-3
    yoz_sign: float = YOZ_SIGN
    integral_time: float = 1.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be > 0")
        if not self.integral_time > 0:
            raise ConfigError("integral_time must be > 0")
        if np.any(np.asarray(self.x_d_limit) < 0):
            raise ConfigError("deadbands must be >= 0")

    @classmethod
    def start(cls, x0: FeatureVector, **kw) -> "ControllerState":
        return cls(x_rfr=x0.as_array(), **kw)


def adjustment(params: ComplianceParams, A: np.ndarray, F_ext, x1, x2, dt: float) -> np.ndarray:
    """Backward-difference solve of the compliance filter for x_d(i)."""
    M, D, K = params.M, params.D, params.K
    lhs = M / dt**2 + D / dt + K
    if np.any(lhs == 0):
        raise PegSimError("singular compliance system")
    rhs = A @ np.asarray(F_ext, dtype=float) + M * (2.0 * x1 - x2) / dt**2 + D * x1 / dt
    return rhs / lhs


def _feed(x_rfr: np.ndarray, st: ControllerState) -> np.ndarray:
    x = x_rfr.copy()
    x[L_] = min(x[L_] + st.v_feed * st.dt, st.depth_target)
    return x


def _as_array(F_ext) -> np.ndarray:
    return F_ext.as_array() if isinstance(F_ext, ResponseVector) else np.asarray(F_ext, dtype=float)


def fbcc_step(st: ControllerState, F_ext, l_now: float, g: Geometry, params: ComplianceParams):
    """One FBCC tick. Returns ``(x_c, x_d, A, new_state)``.

    Components of ``x_d`` outside their deadband are integrated into the
    reference, which then advances in depth by the feed.
    """
    A = direction_matrix(l_now, g, st.yoz_sign)
    x_d = adjustment(params, A, _as_array(F_ext), st.x_d_prev, st.x_d_prev2, st.dt)
    active = np.abs(x_d) > st.x_d_limit
    x_rfr = np.where(active, st.x_rfr - x_d * (st.dt / st.integral_time), st.x_rfr)
    x_rfr = _feed(x_rfr, st)
    new = replace(st, x_rfr=x_rfr, x_d_prev=x_d, x_d_prev2=st.x_d_prev)
    return x_rfr.copy(), x_d, A, new


def admittance_step(st: ControllerState, F_ext, l_now: float, g: Geometry, params: ComplianceParams):
    """One admittance tick: same filter, plain moment channel, no reference integration."""
    A = direction_matrix(l_now, g, st.yoz_sign, gamma_value=0.0)
    x_d = adjustment(params, A, _as_array(F_ext), st.x_d_prev, st.x_d_prev2, st.dt)
    x_rfr = _feed(st.x_rfr, st)
    x_c = x_rfr - x_d
    x_c[L_] = x_rfr[L_]
    new = replace(st, x_rfr=x_rfr, x_d_prev=x_d, x_d_prev2=st.x_d_prev)
    return x_c, x_d, A, new


def open_loop_step(st: ControllerState, F_ext, l_now: float, g: Geometry, params: ComplianceParams):
    """Pure position feed that ignores the wrench."""
    x_rfr = _feed(st.x_rfr, st)
    return x_rfr.copy(), np.zeros(5), np.eye(5), replace(st, x_rfr=x_rfr)


STEPPERS = {"fbcc": fbcc_step, "admittance": admittance_step, "open_loop": open_loop_step}


def exceeds_limits(st: ControllerState, F_ext) -> bool:
    w = np.abs(_as_array(F_ext))
    return bool(w[:3].max() > st.force_limit or w[3:].max() > st.moment_limit)


def should_terminate(st: ControllerState, F_ext, l_now: float, L: float) -> Termination:
    """Depth reached wins over an excessive wrench on the same tick."""
    if l_now >= L:
        return Termination.SUCCESS
    if exceeds_limits(st, F_ext):
        return Termination.FORCE_ABORT
    return Termination.CONTINUE
