"""Equivalent wrench at the sensor point from a feature vector.

The inserted part of the peg is cut into horizontal slices. In each slice the
peg section is an ellipse and the hole section a circle of radius ``R``. Along
a ray from the hole axis at angle ``alpha`` the interpenetration of the far
ellipse boundary past the hole wall gives a linear (Lame) contact pressure,
and integrating pressure, friction and lever arms over slices and angles gives
``(F_x, F_y, F_z, M_x, M_y)``. The sensor sits under the hole bottom, so a
slice at height ``s`` carries the lever ``L + H - s_u + s + mu*R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import FeatureVector, axis_tilt

RESPONSE_NAMES = ("F_x", "F_y", "F_z", "M_x", "M_y")


@dataclass(frozen=True)
class Geometry:
    """Hole radius ``R``, peg radius ``r``, hole depth ``L``, bottom thickness ``H``,
    contact stiffness ``k`` (Pa) and friction coefficient ``mu``."""

    R: float
    r: float
    L: float
    H: float
    k: float
    mu: float

    def __post_init__(self):
        for name in ("R", "r", "L", "H", "k"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"geometry field {name} must be > 0")
        if self.mu < 0:
            raise ConfigError("friction coefficient must be >= 0")
        if abs(self.R - self.r) / self.R >= 0.05:
            raise ConfigError("|R - r|/R must stay below 0.05 (precision fit)")

    @property
    def clearance(self) -> float:
        return self.R - self.r

    @property
    def is_clearance_fit(self) -> bool:
        return self.R > self.r


@dataclass(frozen=True)
class ResponseVector:
    F_x: float = 0.0
    F_y: float = 0.0
    F_z: float = 0.0
    M_x: float = 0.0
    M_y: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.F_x, self.F_y, self.F_z, self.M_x, self.M_y])

    @classmethod
    def from_array(cls, a) -> "ResponseVector":
        return cls(*(float(v) for v in np.asarray(a, dtype=float)[:5]))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))


@dataclass(frozen=True)
class QuadratureSpec:
    n_s: int = 64
    n_alpha: int = 256
    rule: str = "midpoint"

    def validate(self) -> None:
        if int(self.n_s) != self.n_s or self.n_s < 2:
            raise ConfigError(f"n_s must be an integer >= 2, got {self.n_s}")
        if int(self.n_alpha) != self.n_alpha or self.n_alpha < 8:
            raise ConfigError(f"n_alpha must be an integer >= 8, got {self.n_alpha}")
        if self.n_alpha % 2:
            raise ConfigError(f"n_alpha must be even to keep the mirror symmetry, got {self.n_alpha}")
        if self.rule not in ("midpoint", "trapezoid"):
            raise ConfigError(f"unknown quadrature rule {self.rule!r}")

    def refined(self, factor: int = 2, rule: str | None = None) -> "QuadratureSpec":
        return QuadratureSpec(self.n_s * factor, self.n_alpha * factor, rule or self.rule)


DEFAULT_QUADRATURE = QuadratureSpec()


def slice_center(x: FeatureVector, g: Geometry, s):
    """Centre of the elliptical peg section at height ``s`` above the lowest rim point.

    ``s`` may be an array. Valid heights run from 0 to the top of the
    integration domain, ``(l + r*sin(theta))*cos(theta)``.
    """
    tilt = axis_tilt(x)
    st, ct = math.sin(tilt.theta), math.cos(tilt.theta)
    s = np.asarray(s, dtype=float)
    s_top = (x.l + g.r * st) * ct
    if np.any(s < 0) or np.any(s > s_top * (1 + 1e-12) + 1e-18):
        raise DomainError("slice height outside the inserted part of the peg")
    shift = (0.5 * x.l + g.r * st - s / ct) * st
    ox = x.d_x - shift * math.cos(tilt.phi)
    oy = x.d_y - shift * math.sin(tilt.phi)
    if ox.ndim == 0:
        return float(ox), float(oy)
    return ox, oy


def _far_root_frame(au, av, bu, bv, r, c2):
    # far ray parameter in the tilt frame (u along the tilt direction): ray
    # t*(au, av) against c2*(u - bu)^2 + (v - bv)^2 = r^2
    A = c2 * au * au + av * av
    B = (c2 * bu) * au + bv * av
    C = c2 * bu * bu + bv * bv - r * r
    disc = B * B - A * C
    if np.min(disc) < 0.0:
        ok = disc >= 0.0
        t = np.where(ok, (B + np.sqrt(np.where(ok, disc, 0.0))) / A, 0.0)
    else:
        t = (B + np.sqrt(disc)) / A
    return np.maximum(t, 0.0)


def _far_root(ca, sa, ox, oy, r, theta, phi):
    # ray t*(cos a, sin a) against the section ellipse, stretched by 1/cos(theta)
    # along the tilt direction; returns the far intersection distance or 0
    cp, sp = math.cos(phi), math.sin(phi)
    return _far_root_frame(
        cp * ca + sp * sa, -sp * ca + cp * sa, cp * ox + sp * oy, -sp * ox + cp * oy, r, math.cos(theta) ** 2
    )


def radial_gap(x: FeatureVector, g: Geometry, s, alpha):
    """Distance ``O_h G`` from the hole axis to the far peg boundary along ``alpha``."""
    tilt = axis_tilt(x)
    ox, oy = slice_center(x, g, s)
    a = np.asarray(alpha, dtype=float)
    t = _far_root(np.cos(a), np.sin(a), np.asarray(ox), np.asarray(oy), g.r, tilt.theta, tilt.phi)
    return float(t) if t.ndim == 0 else t


def stress(gap, g: Geometry):
    """Contact pressure ``k (gap - R)/R`` where the peg reaches past the wall, else 0."""
    gap = np.asarray(gap, dtype=float)
    p = np.where(gap >= g.R, g.k * (gap - g.R) / g.R, 0.0)
    return float(p) if p.ndim == 0 else p


@lru_cache(maxsize=64)
def _unit_nodes(n: int, rule: str, periodic: bool):
    # nodes on [0, 1) (periodic) or [0, 1], with weights summing to 1
    if rule == "midpoint":
        u = (np.arange(n) + 0.5) / n
        w = np.full(n, 1.0 / n)
    elif periodic:
        u = np.arange(n) / n
        w = np.full(n, 1.0 / n)
    else:
        u = np.linspace(0.0, 1.0, n + 1)
        w = np.full(n + 1, 1.0 / n)
        w[[0, -1]] *= 0.5
    u.setflags(write=False)
    w.setflags(write=False)
    return u, w


@lru_cache(maxsize=64)
def _alpha_grid(n: int, rule: str):
    u, w = _unit_nodes(n, rule, True)
    a = -math.pi + 2.0 * math.pi * u
    ca, sa = np.cos(a), np.sin(a)
    # make the reflections a -> -a and a -> pi - a exact on the grid
    j = np.arange(n)
    off = 1 if rule == "midpoint" else 0
    neg = (-j - off) % n
    mir = (n // 2 - j - off) % n
    ca = 0.25 * (ca + ca[neg] - ca[mir] - ca[neg][mir])
    sa = 0.25 * (sa - sa[neg] + sa[mir] - sa[neg][mir])
    return ca[None, :], sa[None, :], 2.0 * math.pi * w


def integration_limits(x: FeatureVector, g: Geometry) -> tuple[float, float]:
    """Slice heights spanned by the inserted axial length ``l``.

    The lower limit is the height of the end-face centre above the lowest rim
    point, so the middle slice sits at axial depth ``l/2`` where the lateral
    offsets are defined.
    """
    tilt = axis_tilt(x)
    st, ct = math.sin(tilt.theta), math.cos(tilt.theta)
    s_lo = g.r * st * ct
    return s_lo, s_lo + x.l * ct


def _slice_nodes(x: FeatureVector, g: Geometry, q: QuadratureSpec):
    s_lo, s_hi = integration_limits(x, g)
    u, _ = _unit_nodes(q.n_s, q.rule, False)
    return s_lo + (s_hi - s_lo) * u, s_lo, s_hi


def pressure_field(x: FeatureVector, g: Geometry, q: QuadratureSpec = DEFAULT_QUADRATURE):
    """Pressure on the uniform (slice, angle) grid plus the nodes and weights."""
    q.validate()
    s, s_lo, s_hi = _slice_nodes(x, g, q)
    ws = (s_hi - s_lo) * _unit_nodes(q.n_s, q.rule, False)[1]
    ca, sa, wa = _alpha_grid(q.n_alpha, q.rule)
    tilt = axis_tilt(x)
    ox, oy = slice_center(x, g, s)
    t = _far_root(ca, sa, ox[:, None], oy[:, None], g.r, tilt.theta, tilt.phi)
    p = np.where(t >= g.R, g.k * (t - g.R) / g.R, 0.0)
    return p, s, ws, ca, sa, wa, s_hi


@lru_cache(maxsize=64)
def _wall_grid(n_alpha: int, rule: str):
    u, _ = _unit_nodes(n_alpha, rule, True)
    a = -math.pi + 2.0 * math.pi * u
    return a, np.cos(a), np.sin(a), np.roll(np.arange(n_alpha), -1)


def _wall_crossings(bu, bv, g: Geometry, c2, phi, n_alpha: int, rule: str) -> np.ndarray:
    """Angles at which the end slices, with tilt-frame centres ``(bu, bv)``
    (shape ``(2, 1)``), start or stop touching the hole wall."""
    a, ca, sa, nxt = _wall_grid(n_alpha, rule)
    cp, sp = math.cos(phi), math.sin(phi)
    pu = (g.R * (cp * ca + sp * sa)) - bu
    pv = (g.R * (cp * sa - sp * ca)) - bv
    f = c2 * pu * pu + pv * pv - g.r * g.r
    pos = f > 0.0
    row, idx = (pos != pos[:, nxt]).nonzero()
    if idx.size == 0:
        return idx.astype(float)
    h = 2.0 * math.pi / n_alpha
    R, r2 = g.R, g.r * g.r
    roots = []
    f0s, f1s = f[row, idx].tolist(), f[row, nxt[idx]].tolist()
    los, u0s, v0s = a[idx].tolist(), bu[row, 0].tolist(), bv[row, 0].tolist()
    for f0, f1, lo, u0, v0 in zip(f0s, f1s, los, u0s, v0s):
        z = lo + h * f0 / (f0 - f1)
        # two Newton steps from the secant estimate, kept inside the bracket
        for _ in range(2):
            au, av = math.cos(z - phi), math.sin(z - phi)
            pu, pv = R * au - u0, R * av - v0
            dz = 2.0 * R * (pv * au - c2 * pu * av)
            if dz != 0.0:
                z = min(max(z - (c2 * pu * pu + pv * pv - r2) / dz, lo), lo + h)
        roots.append((z + math.pi) % (2.0 * math.pi) - math.pi)
    roots.sort()
    return np.array([z for i, z in enumerate(roots) if i == 0 or z - roots[i - 1] > 1e-14])


@lru_cache(maxsize=256)
def _gauss(n: int):
    u, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (u + 1.0), 0.5 * w


def _angle_nodes(cuts: np.ndarray, n_alpha: int, rule: str):
    """Angle nodes and weights: the uniform periodic grid when the integrand
    is smooth, otherwise Gauss-Legendre on every arc between ``cuts``."""
    if cuts.size == 0:
        ca, sa, wa = _alpha_grid(n_alpha, rule)
        return ca[0], sa[0], wa
    starts = cuts.tolist()
    spans = [b - a for a, b in zip(starts, starts[1:] + [starts[0] + 2.0 * math.pi])]
    counts = [max(8, math.ceil(n_alpha * sp / (2.0 * math.pi))) for sp in spans]
    if len(set(counts)) == 1:
        u, w = _gauss(counts[0])
        sp = np.array(spans)[:, None]
        a = (cuts[:, None] + sp * u).ravel()
        wa = (sp * w).ravel()
    else:
        parts = [_gauss(n) for n in counts]
        a = np.concatenate([a0 + sp * u for a0, sp, (u, _) in zip(starts, spans, parts)])
        wa = np.concatenate([sp * w for sp, (_, w) in zip(spans, parts)])
    return np.cos(a), np.sin(a), wa


def _slice_moments(gap: np.ndarray, s: np.ndarray, rule: str):
    """Per-cell centre, exact-clip integrals of max(gap, 0) and its first moment.

    The signed gap is smooth in ``s``; only its positive part has a kink. Each
    cell uses the local value, slope and curvature of the signed gap, with the
    clipped cells integrated exactly for the linear part.
    """
    h = s[1] - s[0]
    d = np.diff(gap, axis=0)
    dd = np.empty_like(gap)
    dd[1:-1] = d[1:] - d[:-1]
    dd[0], dd[-1] = dd[1], dd[-2]
    if rule == "midpoint":
        sc, gc = s, gap
        m = np.empty_like(gap)
        m[1:-1] = 0.5 * (d[1:] + d[:-1])
        m[0] = d[0] - 0.5 * dd[0]
        m[-1] = d[-1] + 0.5 * dd[-1]
        m /= h
        full_i0 = (gc + dd / 24.0) * h
    else:
        sc = 0.5 * (s[1:] + s[:-1])
        gc = 0.5 * (gap[1:] + gap[:-1])
        m = d / h
        full_i0 = (gc - (dd[1:] + dd[:-1]) / 24.0) * h
    half = 0.5 * h * np.abs(m)
    full = gc >= half
    i0 = full_i0 * full
    i1 = (m * (h**3 / 12.0)) * full
    part = np.nonzero(~full & (gc + half > 0.0))
    if part[0].size:
        g_hi = gc[part] + half[part]
        length = h * g_hi / (2.0 * half[part])
        tri = 0.5 * g_hi * length
        i0[part] = tri
        i1[part] = tri * np.sign(m[part]) * (0.5 * h - length / 3.0)
    return sc, i0, i1


def respond(x: FeatureVector, g: Geometry, q: QuadratureSpec = DEFAULT_QUADRATURE) -> ResponseVector:
    """Quadrature of the contact pressure into ``(F_x, F_y, F_z, M_x, M_y)``.

    ``F_z`` is the friction resultant ``mu * integral(p)``, which opposes
    insertion and is non-negative.
    """
    q.validate()
    if x.l <= 0.0:
        return ResponseVector()
    tilt = axis_tilt(x)
    st, ct = math.sin(tilt.theta), math.cos(tilt.theta)
    cp, sp = math.cos(tilt.phi), math.sin(tilt.phi)
    c2 = ct * ct
    s_lo = g.r * st * ct
    s_hi = s_lo + x.l * ct
    # no slice reaches the wall if centre offset plus major semi-axis stays inside
    du = cp * x.d_x + sp * x.d_y
    dv = -sp * x.d_x + cp * x.d_y
    reach = max(abs(du - (0.5 * x.l + g.r * st - s / ct) * st) for s in (s_lo, s_hi))
    if math.hypot(reach, dv) + g.r / ct < g.R:
        return ResponseVector()
    u, _ = _unit_nodes(q.n_s, q.rule, False)
    s = np.concatenate(([s_lo], s_lo + (s_hi - s_lo) * u, [s_hi]))
    # slice centres in the tilt frame; the tilt moves them along u only
    bu = du - (0.5 * x.l + g.r * st - s / ct) * st
    bv = np.full_like(s, dv)
    cuts = _wall_crossings(bu[[0, -1], None], bv[[0, -1], None], g, c2, tilt.phi, q.n_alpha, q.rule)
    ca, sa, wa = _angle_nodes(cuts, q.n_alpha, q.rule)
    t = _far_root_frame((cp * ca + sp * sa)[None, :], (cp * sa - sp * ca)[None, :], bu[1:-1, None], bv[1:-1, None], g.r, c2)
    gap = t - g.R
    if not (gap > 0.0).any():
        return ResponseVector()
    sc, i0, i1 = _slice_moments(gap, s[1:-1], q.rule)
    lever = g.L + g.H - s_hi + sc + g.mu * g.R
    # pressure k*gap/R over the arc element R*d(alpha)
    f0 = g.k * (i0.sum(axis=0) * wa)
    f1 = g.k * ((lever @ i0 + i1.sum(axis=0)) * wa)
    return ResponseVector(
        F_x=float(f0 @ ca),
        F_y=float(f0 @ sa),
        F_z=float(g.mu * f0.sum()),
        M_x=float(f1 @ sa),
        M_y=float(f1 @ ca),
    )


def respond_oracle(x: FeatureVector, g: Geometry, q: QuadratureSpec = DEFAULT_QUADRATURE) -> ResponseVector:
    """Independent check path: the other quadrature rule at 4x the resolution."""
    other = "trapezoid" if q.rule == "midpoint" else "midpoint"
    return respond(x, g, q.refined(4, other))


def respond_batch(xs, g: Geometry, q: QuadratureSpec = DEFAULT_QUADRATURE, workers: int | None = None) -> np.ndarray:
    """Wrenches for many feature points as an ``(n, 5)`` array."""
    xs = list(xs)
    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda x: respond(x, g, q).as_array(), xs))
    else:
        rows = [respond(x, g, q).as_array() for x in xs]
    return np.array(rows).reshape(len(xs), 5)


def calibrate_stiffness(
    R: float,
    r: float,
    L: float,
    H: float,
    mu: float,
    target_fz: float = 50.0,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    tol: float = 1e-10,
) -> float:
    """Bisection for ``k`` such that a centred peg fully inserted into an
    interference-fit hole carries axial force ``target_fz``."""
    if not r > R:
        raise ConfigError("stiffness calibration needs an interference fit (r > R)")
    x = FeatureVector(0.0, 0.0, L, 0.0, 0.0)

    def fz(k):
        return respond(x, Geometry(R, r, L, H, k, mu), q).F_z - target_fz

    lo, hi = 1.0, 1.0
    while fz(hi) < 0:
        hi *= 10.0
    while fz(lo) > 0:
        lo /= 10.0
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if fz(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
