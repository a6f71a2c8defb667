"""Closed-loop insertion runs, randomized sweeps and open-path replays.

Each tick reads the wrench at the current feature point, passes it through
the compensation hook, steps the selected controller and moves an ideal
position robot to the command. Once the target depth is reached the loop can
keep regulating at full depth until both response labels have stayed ``P_0``
for ``settle_time``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .contact import Geometry, QuadratureSpec, respond
from .controller import (
    STEPPERS,
    TX,
    TY,
    YOZ_SIGN,
    ComplianceParams,
    ControllerState,
    Termination,
    exceeds_limits,
    gamma,
    should_terminate,
)
from .errors import ConfigError, DomainError, PegSimError
from .geometry import FeatureVector
from .states import (
    DEFAULT_TOLERANCES,
    XOZ,
    YOZ,
    BoundaryTolerances,
    ContactState,
    classify_feature_vector,
    classify_responses,
    plane_responses,
    response_coordinates,
)

SIM_QUADRATURE = QuadratureSpec(16, 64)
DEFAULT_DEADBAND = (1e-8, 1e-8, 1e-8, 1e-6, 1e-6)


def nominal_geometry(fit: str = "clearance", radius: float = 5e-3) -> Geometry:
    """Test geometry: 0.01 mm radial clearance or 0.01 mm interference.

    The peg radius is ``radius + 0.04 mm``, the hole radius adds (clearance)
    or removes (interference) 0.01 mm, and ``k`` is the value that gives 50 N
    of axial force for a centred, fully inserted interference fit at the
    5 mm nominal radius.
    """
    r = radius + 0.04e-3
    if fit == "clearance":
        R = r + 0.01e-3
    elif fit == "interference":
        R = r - 0.01e-3
    else:
        raise ConfigError(f"unknown fit type {fit!r}")
    return Geometry(R=R, r=r, L=10e-3, H=5e-3, k=NOMINAL_STIFFNESS, mu=0.3)


# calibrate_stiffness(5.03e-3, 5.04e-3, 10e-3, 5e-3, 0.3)
NOMINAL_STIFFNESS = 265258238.49


@dataclass(frozen=True)
class Scenario:
    """A single insertion run. ``initial_deviation.l`` must be 0."""

    geometry: Geometry
    initial_deviation: FeatureVector = FeatureVector()
    target_depth: float | None = None
    params: ComplianceParams = field(default_factory=lambda: ComplianceParams.table("3"))
    controller: str = "fbcc"
    dt: float = 1e-3
    duration: float = 20.0
    v_feed: float = 5e-3
    quadrature: QuadratureSpec = SIM_QUADRATURE
    seed: int = 0
    x_d_limit: tuple = DEFAULT_DEADBAND
    integral_time: float = 1.0
    force_limit: float = 500.0
    moment_limit: float = 10.0
    yoz_sign: float = YOZ_SIGN
    hold: bool = True
    settle_time: float = 0.5
    tolerances: BoundaryTolerances = DEFAULT_TOLERANCES

    @property
    def depth(self) -> float:
        return self.geometry.L if self.target_depth is None else self.target_depth

    def validate(self) -> None:
        if self.controller not in STEPPERS:
            raise ConfigError(f"unknown controller {self.controller!r}")
        if self.initial_deviation.l != 0:
            raise ConfigError("initial deviation must start at l = 0")
        if not (self.dt > 0 and self.duration > 0 and self.v_feed > 0):
            raise ConfigError("dt, duration and v_feed must be > 0")
        if not 0 < self.depth <= self.geometry.L:
            raise ConfigError("target depth must lie in (0, L]")
        if self.settle_time < 0:
            raise ConfigError("settle_time must be >= 0")
        if len(self.x_d_limit) != 5:
            raise ConfigError("x_d_limit needs five entries")
        self.quadrature.validate()

    def controller_state(self) -> ControllerState:
        return ControllerState.start(
            self.initial_deviation,
            dt=self.dt,
            x_d_limit=np.asarray(self.x_d_limit, dtype=float),
            force_limit=self.force_limit,
            moment_limit=self.moment_limit,
            v_feed=self.v_feed,
            depth_target=self.depth,
            yoz_sign=self.yoz_sign,
            integral_time=self.integral_time,
        )


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    x_cmd: FeatureVector
    x_act: FeatureVector
    F_ext: np.ndarray
    state_xoz: ContactState
    state_yoz: ContactState
    x_d: np.ndarray
    gamma: float


@dataclass
class Trajectory:
    """Column store of a run; row ``i`` is the tick at time ``t[i]``."""

    t: np.ndarray
    x_act: np.ndarray
    x_cmd: np.ndarray
    F: np.ndarray
    x_d: np.ndarray
    gamma: np.ndarray
    state_xoz: list
    state_yoz: list

    def __len__(self) -> int:
        return len(self.t)

    def record(self, i: int) -> TrajectoryRecord:
        return TrajectoryRecord(
            float(self.t[i]),
            FeatureVector.from_array(self.x_cmd[i]),
            FeatureVector.from_array(self.x_act[i]),
            self.F[i].copy(),
            self.state_xoz[i],
            self.state_yoz[i],
            self.x_d[i].copy(),
            float(self.gamma[i]),
        )


@dataclass
class RunMetrics:
    success: bool
    abort_reason: str | None
    reached_time: float | None
    settled: bool
    settling_time: float | None
    final_state: tuple
    peak_wrench: np.ndarray
    terminal_wrench: np.ndarray
    terminal_deviation: np.ndarray
    max_abs_theta_y: float
    overshoot_theta_y: float
    min_fz_in_contact: float
    steps: int

    def to_dict(self) -> dict:
        def arr(a):
            return [float(v) for v in a]

        return {
            "success": self.success,
            "abort_reason": self.abort_reason,
            "reached_time": self.reached_time,
            "settled": self.settled,
            "settling_time": self.settling_time,
            "final_state": [str(s) for s in self.final_state],
            "peak_wrench": arr(self.peak_wrench),
            "terminal_wrench": arr(self.terminal_wrench),
            "terminal_deviation": arr(self.terminal_deviation),
            "max_abs_theta_y": self.max_abs_theta_y,
            "overshoot_theta_y": self.overshoot_theta_y,
            "min_fz_in_contact": self.min_fz_in_contact,
            "steps": self.steps,
        }


def identity_compensation(F: np.ndarray) -> np.ndarray:
    """Sensor compensation seam; the simulated wrench needs none."""
    return F


def response_labels(F, l: float, g: Geometry, tol: BoundaryTolerances) -> tuple:
    """Response-side labels of both planes, tolerant of tiny axial loads.

    Outside the strict classifier a lateral force with ``0 < F_z <= eps`` is
    still placed by its (u, v) sector.
    """
    out = []
    for plane in (XOZ, YOZ):
        F_lat, F_z, M = plane_responses(F, plane)
        out.append(classify_responses(plane, F_lat, F_z, M, l, g, tol, strict=False))
    return tuple(out)


def run_scenario(
    sc: Scenario,
    compensate: Callable[[np.ndarray], np.ndarray] = identity_compensation,
) -> tuple[Trajectory, RunMetrics]:
    sc.validate()
    g, q, tol = sc.geometry, sc.quadrature, sc.tolerances
    step = STEPPERS[sc.controller]
    st = sc.controller_state()
    n_max = int(round(sc.duration / sc.dt)) + 1
    settle_ticks = int(round(sc.settle_time / sc.dt))
    # a pure position feed has nothing left to regulate at full depth
    hold = sc.hold and sc.controller != "open_loop"

    t = np.empty(n_max)
    X = np.empty((n_max, 5))
    C = np.empty((n_max, 5))
    W = np.empty((n_max, 5))
    XD = np.empty((n_max, 5))
    GM = np.empty(n_max)
    lab_x, lab_y = [], []

    x_act = sc.initial_deviation
    abort = None
    reached = None
    streak = 0
    n = 0
    for i in range(n_max):
        F = np.asarray(compensate(respond(x_act, g, q).as_array()), dtype=float)
        if not np.all(np.isfinite(F)):
            raise PegSimError(f"non-finite wrench at t={i * sc.dt:.6g} s")
        sx, sy = response_labels(F, x_act.l, g, tol)
        term = should_terminate(st, F, x_act.l, sc.depth)
        if term is Termination.SUCCESS and reached is None:
            reached = i * sc.dt
        x_c, x_d, _, st = step(st, F, x_act.l, g, sc.params)
        t[i] = i * sc.dt
        X[i] = x_act.as_array()
        C[i] = x_c
        W[i] = F
        XD[i] = x_d
        GM[i] = gamma(x_act.l, g) if sc.controller == "fbcc" else 0.0
        lab_x.append(sx)
        lab_y.append(sy)
        n = i + 1
        if term is Termination.FORCE_ABORT or (reached is not None and exceeds_limits(st, F)):
            abort = "force_abort"
            break
        streak = streak + 1 if (sx is ContactState.P_0 and sy is ContactState.P_0) else 0
        if reached is not None and (not hold or streak > settle_ticks):
            break
        x_act = FeatureVector.from_array(x_c)

    traj = Trajectory(t[:n], X[:n], C[:n], W[:n], XD[:n], GM[:n], lab_x, lab_y)
    if abort is None and reached is None:
        abort = "duration"
    return traj, _metrics(sc, traj, abort, reached)


def _metrics(sc: Scenario, tr: Trajectory, abort, reached) -> RunMetrics:
    F = tr.F
    last = len(tr) - 1
    final = (tr.state_xoz[last], tr.state_yoz[last])
    settled = all(s is ContactState.P_0 for s in final)
    settling_time = None
    if settled:
        k = last
        while k > 0 and tr.state_xoz[k - 1] is ContactState.P_0 and tr.state_yoz[k - 1] is ContactState.P_0:
            k -= 1
        settling_time = float(tr.t[k])
    ty = tr.x_act[:, TY]
    j = int(np.argmax(np.abs(ty)))
    excess = abs(ty[j]) - abs(sc.initial_deviation.theta_y)
    overshoot = math.copysign(excess, ty[j]) if excess > 0 else 0.0
    dev = tr.x_act[last].copy()
    dev[2] = sc.depth - dev[2]
    contact = tr.x_act[:, 2] > 0
    fz = F[contact, 2]
    return RunMetrics(
        success=abort is None,
        abort_reason=abort,
        reached_time=reached,
        settled=settled,
        settling_time=settling_time,
        final_state=final,
        peak_wrench=np.abs(F).max(axis=0),
        terminal_wrench=F[last].copy(),
        terminal_deviation=dev,
        max_abs_theta_y=float(abs(ty[j])),
        overshoot_theta_y=float(overshoot),
        min_fz_in_contact=float(fz.min()) if fz.size else float("nan"),
        steps=len(tr),
    )


@dataclass
class SweepReport:
    deviations: np.ndarray
    metrics: list

    @property
    def success_rate(self) -> float:
        return sum(m.success for m in self.metrics) / len(self.metrics)

    @property
    def settled_rate(self) -> float:
        return sum(m.settled for m in self.metrics) / len(self.metrics)

    def summary(self) -> dict:
        peak_fz = np.array([m.peak_wrench[2] for m in self.metrics])
        term = np.array([np.linalg.norm(m.terminal_wrench) for m in self.metrics])
        min_fz = np.array([m.min_fz_in_contact for m in self.metrics])

        def stats(a):
            return {"min": float(a.min()), "median": float(np.median(a)), "max": float(a.max())}

        return {
            "n": len(self.metrics),
            "success_rate": self.success_rate,
            "settled_rate": self.settled_rate,
            "peak_F_z": stats(peak_fz),
            "terminal_wrench_norm": stats(term),
            "min_F_z_in_contact": float(np.nanmin(min_fz)),
        }


def random_deviations(n: int, seed: int, lateral: float = 0.1e-3, tilt: float = math.radians(2.0)) -> np.ndarray:
    """``n`` rows of uniform (d_x, d_y, 0, theta_x, theta_y) deviations."""
    rng = np.random.default_rng(seed)
    out = np.zeros((n, 5))
    out[:, [0, 1]] = rng.uniform(-lateral, lateral, size=(n, 2))
    out[:, [3, 4]] = rng.uniform(-tilt, tilt, size=(n, 2))
    return out


def run_sweep(
    template: Scenario,
    n: int,
    lateral: float = 0.1e-3,
    tilt: float = math.radians(2.0),
    workers: int | None = None,
) -> SweepReport:
    """``n`` runs of ``template`` from deviations seeded by ``template.seed``."""
    if n < 1:
        raise ConfigError("sweep needs n >= 1")
    devs = random_deviations(n, template.seed, lateral, tilt)
    scs = [replace(template, initial_deviation=FeatureVector.from_array(d)) for d in devs]

    def one(sc):
        return run_scenario(sc)[1]

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            metrics = list(pool.map(one, scs))
    else:
        metrics = [one(sc) for sc in scs]
    return SweepReport(devs, metrics)


def calibrate_yoz_sign(g: Geometry | None = None, duration: float = 4.0) -> float:
    """Pick the Y-O-Z row sign that makes ``|theta_x|`` contract on a
    single-plane run with offset and tilt in Y-O-Z only."""
    g = g or nominal_geometry("clearance")
    x0 = FeatureVector(0.0, 0.05e-3, 0.0, math.radians(2.0), 0.0)
    scores = {}
    for sign in (1.0, -1.0):
        sc = Scenario(g, x0, duration=duration, yoz_sign=sign, settle_time=0.2)
        try:
            tr, m = run_scenario(sc)
        except DomainError:
            scores[sign] = math.inf
            continue
        final = abs(tr.x_act[-1, TX])
        scores[sign] = final if m.success else math.inf
    best = min(scores, key=scores.get)
    if not scores[best] < abs(x0.theta_x):
        raise PegSimError("neither Y-O-Z sign contracts the tilt")
    return best


@dataclass
class ReplayTrace:
    path: np.ndarray
    F: np.ndarray
    u: np.ndarray
    v: np.ndarray
    feature_states: list
    response_states: list


def replay_feature_trajectory(
    path: Sequence[FeatureVector],
    g: Geometry,
    q: QuadratureSpec = SIM_QUADRATURE,
    tol: BoundaryTolerances = DEFAULT_TOLERANCES,
) -> ReplayTrace:
    """Wrench, (u, v) coordinates and both labels along a feature path.

    ``u`` and ``v`` are ``(n, 2)`` with columns for X-O-Z and Y-O-Z; labels
    are (X-O-Z, Y-O-Z) pairs.
    """
    path = list(path)
    n = len(path)
    F = np.zeros((n, 5))
    u = np.full((n, 2), np.nan)
    v = np.full((n, 2), np.nan)
    feat, resp = [], []
    for i, x in enumerate(path):
        F[i] = respond(x, g, q).as_array()
        for k, plane in enumerate((XOZ, YOZ)):
            F_lat, F_z, M = plane_responses(F[i], plane)
            if F_z > 0:
                u[i, k], v[i, k] = response_coordinates(F_lat, F_z, M, g)
            elif F_lat == 0 and M == 0:
                u[i, k] = v[i, k] = 0.0
        feat.append(classify_feature_vector(x, g))
        resp.append(response_labels(F[i], x.l, g, tol))
    return ReplayTrace(np.array([x.as_array() for x in path]).reshape(n, 5), F, u, v, feat, resp)


def state_tour(
    g: Geometry,
    l: float = 5e-3,
    d: float = 0.05e-3,
    theta: float = math.radians(1.0),
    per_leg: int = 10,
) -> list[FeatureVector]:
    """Piecewise-linear X-O-Z path through all nine labels.

    The waypoints sit exactly on ``theta = 0`` and ``d = 0`` so the planar and
    zero-offset states are hit, not just crossed.
    """
    corners = [
        (0.0, 0.0), (d, 0.0), (d, theta), (0.0, theta), (-d, theta),
        (-d, 0.0), (-d, -theta), (0.0, -theta), (d, -theta), (d, 0.0), (0.0, 0.0),
    ]
    out = []
    for (a0, b0), (a1, b1) in zip(corners[:-1], corners[1:]):
        for s in np.linspace(0.0, 1.0, per_leg, endpoint=False):
            out.append(FeatureVector(d_x=a0 + s * (a1 - a0), l=l, theta_y=b0 + s * (b1 - b0)))
    out.append(FeatureVector(l=l))
    return out

