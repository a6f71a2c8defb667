"""Invariant checks of the contact model and classifiers, run as a table.

Each check samples random feature points from a seeded generator and compares
the wrench against an identity that must hold for the model: zero lateral
force for a centred, untilted peg; the planar moment-to-force ratio; the
friction cone; no force inside the clearance rhombus; quadrature convergence;
and agreement of the two classifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contact import DEFAULT_QUADRATURE, Geometry, QuadratureSpec, _alpha_grid, respond
from .errors import ConfigError
from .geometry import FeatureVector
from .states import (
    DEFAULT_TOLERANCES,
    XOZ,
    YOZ,
    BoundaryTolerances,
    boundary_slope,
    classify_features,
    classify_responses,
    plane_features,
    plane_responses,
)

LATERAL = 0.1e-3
TILT = math.radians(2.0)


@dataclass(frozen=True)
class Profile:
    n_mapping: int
    n_ratio: int
    n_friction: int
    n_nullity: int
    n_convergence: int
    n_agreement: int
    mapping_tol: float = 1e-9
    ratio_tol: float = 1e-6
    convergence_tol: float = 1e-3
    agreement_min: float = 0.95


PROFILES = {
    "default": Profile(50, 50, 200, 50, 10, 200),
    "strict": Profile(200, 200, 1000, 200, 50, 1000, mapping_tol=1e-11, ratio_tol=1e-8),
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    skipped: bool = False

    @property
    def status(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"


def _depth(rng, g: Geometry) -> float:
    return float(rng.uniform(0.05, 1.0) * g.L)


def sample_centred(rng, g: Geometry) -> FeatureVector:
    """d_x = d_y = theta_x = 0 with a random tilt in the other plane."""
    return FeatureVector(l=_depth(rng, g), theta_y=float(rng.uniform(-TILT, TILT)))


def sample_planar(rng, g: Geometry) -> FeatureVector:
    """Untilted peg far enough off-centre to touch the wall."""
    c = max(g.clearance, 0.0)
    mag = rng.uniform(c + 0.1 * (LATERAL - c), LATERAL)
    ang = rng.uniform(-math.pi, math.pi)
    return FeatureVector(mag * math.cos(ang), mag * math.sin(ang), _depth(rng, g))


def sample_any(rng, g: Geometry) -> FeatureVector:
    d = rng.uniform(-LATERAL, LATERAL, 2)
    t = rng.uniform(-TILT, TILT, 2)
    return FeatureVector(float(d[0]), float(d[1]), _depth(rng, g), float(t[0]), float(t[1]))


def sample_contacting(rng, g: Geometry, q: QuadratureSpec, tries: int = 1000):
    """A random point with nonzero wrench, plus that wrench."""
    for _ in range(tries):
        x = sample_any(rng, g)
        w = respond(x, g, q)
        if w.norm() > 0:
            return x, w
    raise RuntimeError("no contacting configuration found")


def sample_inside_rhombus(rng, g: Geometry, plane: str = XOZ, margin: float = 0.0) -> FeatureVector:
    """Clearance-fit point of one plane drawn uniformly from the open rhombus
    ``|d| + l|theta|/2 < R - r`` with ``|theta| <= 2 deg``, other plane centred."""
    c = (1.0 - margin) * g.clearance
    while True:
        l = float(rng.uniform(0.0, 1.0) * g.L)
        d = float(rng.uniform(-c, c))
        t = float(rng.uniform(-TILT, TILT))
        if l > 0 and abs(d) + 0.5 * l * abs(t) < c:
            break
    if plane == XOZ:
        return FeatureVector(d_x=d, l=l, theta_y=t)
    return FeatureVector(d_y=d, l=l, theta_x=t)


def inside_exact_clearance(d: float, l: float, theta: float, g: Geometry) -> bool:
    """Exact contact-free region of one plane for the tilted circular section:
    the far wall is reached when ``|d| + (l/2) sin|theta| + r/cos(theta) > R``."""
    return abs(d) + 0.5 * l * math.sin(abs(theta)) + g.r / math.cos(theta) <= g.R


def planar_ratio(l: float, g: Geometry) -> float:
    return -0.5 * l + g.L + g.H + g.mu * g.R


def far_from_boundaries(F_lat, F_z, M, l, g: Geometry, tol: BoundaryTolerances, bands: float = 3.0) -> bool:
    """True for a no-contact response or one at least ``bands`` tolerance
    widths away from the zero-force axis, the zero-moment axis and the
    planar-contact line."""
    if F_lat == 0 and M == 0:
        return True
    eps = tol.eps_force
    if abs(F_lat) <= bands * eps or abs(M) <= bands * eps * g.R or F_z <= bands * eps:
        return False
    u, v = F_lat / F_z, M / (g.R * F_z)
    s = boundary_slope(l, g)
    side = math.copysign(1.0, u)
    off = math.atan2(side * (v - s * u), side * (u + s * v))
    return abs(off) > bands * tol.eps_angle


def sample_plane_point(rng, g: Geometry, plane: str) -> FeatureVector:
    """Random (d, l, theta) in one plane with the other plane centred."""
    d = float(rng.uniform(-LATERAL, LATERAL))
    t = float(rng.uniform(-TILT, TILT))
    l = _depth(rng, g)
    if plane == XOZ:
        return FeatureVector(d_x=d, l=l, theta_y=t)
    return FeatureVector(d_y=d, l=l, theta_x=t)


def check_quadrature(q: QuadratureSpec) -> CheckResult:
    try:
        q.validate()
    except ConfigError as e:
        return CheckResult("quadrature symmetry", False, str(e))
    ca, sa, _ = _alpha_grid(q.n_alpha, q.rule)
    ca, sa = ca[0], sa[0]
    # the angle grid must be closed under a -> -a and a -> pi - a
    pairs = {(round(c, 12), round(s, 12)) for c, s in zip(ca, sa)}
    ok = all((round(c, 12), round(-s, 12)) in pairs and (round(-c, 12), round(s, 12)) in pairs for c, s in zip(ca, sa))
    return CheckResult("quadrature symmetry", ok, f"n_s={q.n_s} n_alpha={q.n_alpha} rule={q.rule}")


def check_mapping(gs, q, n, tol, rng) -> CheckResult:
    worst = 0.0
    for g in gs:
        for _ in range(n):
            x = sample_centred(rng, g)
            w = respond(x, g, q)
            worst = max(worst, abs(w.F_x) / (g.k * g.R * x.l))
    return CheckResult("zero offset gives zero F_x", worst <= tol, f"max |F_x|/(k R l) = {worst:.3e} (tol {tol:.0e})")


def check_ratio(gs, q, n, tol, rng) -> CheckResult:
    worst = 0.0
    for g in gs:
        for _ in range(n):
            x = sample_planar(rng, g)
            w = respond(x, g, q)
            ref = planar_ratio(x.l, g)
            # both planes carry the same ratio for an untilted peg
            for F, M in ((w.F_x, w.M_y), (w.F_y, w.M_x)):
                if abs(F) > 1e-9 * w.norm():
                    worst = max(worst, abs(M / F - ref) / abs(ref))
    return CheckResult("planar moment/force ratio", worst <= tol, f"max rel err = {worst:.3e} (tol {tol:.0e})")


def check_friction(gs, q, n, rng) -> CheckResult:
    active = [g for g in gs if g.mu > 0]
    if not active:
        return CheckResult("friction cone", True, "mu = 0: no axial load, check skipped", skipped=True)
    worst = 0.0
    for g in active:
        for _ in range(n):
            _, w = sample_contacting(rng, g, q)
            worst = max(worst, g.mu * max(abs(w.F_x), abs(w.F_y)) / w.F_z)
    return CheckResult("friction cone", worst <= 1.0 + 1e-12, f"max mu*|F_lat|/F_z = {worst:.6f} (<= 1)")


def check_nullity(gs, q, n, rng) -> CheckResult:
    clear = [g for g in gs if g.is_clearance_fit]
    if not clear:
        return CheckResult("no contact inside rhombus", True, "no clearance-fit geometry", skipped=True)
    worst = 0.0
    for g in clear:
        for i in range(n):
            x = sample_inside_rhombus(rng, g, XOZ if i % 2 == 0 else YOZ)
            worst = max(worst, respond(x, g, q).norm())
    return CheckResult("no contact inside rhombus", worst == 0.0, f"max |wrench| = {worst:.3e}")


def check_convergence(gs, q, n, tol, rng) -> CheckResult:
    worst = 0.0
    finer = q.refined(2)
    for g in gs:
        for _ in range(n):
            x, w = sample_contacting(rng, g, q)
            a, b = w.as_array(), respond(x, g, finer).as_array()
            # components that vanish by symmetry are compared against the wrench scale
            scale = np.maximum(np.abs(b), 1e-6 * np.linalg.norm(b))
            worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return CheckResult(
        "quadrature convergence", worst < tol, f"max rel change x2 refinement = {worst:.3e} (tol {tol:.0e})"
    )


def check_agreement(gs, q, n, tol: BoundaryTolerances, need, rng) -> CheckResult:
    active = [g for g in gs if g.mu > 0]
    if not active:
        return CheckResult("classifier agreement", True, "mu = 0: response labels undefined, check skipped", skipped=True)
    rates = []
    for g in active:
        kept = agree = 0
        while kept < n:
            plane = XOZ if kept % 2 == 0 else YOZ
            x = sample_plane_point(rng, g, plane)
            w = respond(x, g, q).as_array()
            resp = plane_responses(w, plane)
            if not far_from_boundaries(*resp, x.l, g, tol):
                continue
            kept += 1
            feat = classify_features(plane, *plane_features(x, plane), g)
            agree += feat is classify_responses(plane, *resp, x.l, g, tol)
        rates.append(agree / kept)
    lo = min(rates)
    return CheckResult(
        "classifier agreement", lo >= need, "rates " + ", ".join(f"{r:.3f}" for r in rates) + f" (min {need})"
    )


def run_checks(
    geometries,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    profile: str = "default",
    tol: BoundaryTolerances = DEFAULT_TOLERANCES,
    seed: int = 0,
) -> list[CheckResult]:
    if profile not in PROFILES:
        raise ConfigError(f"unknown tolerance profile {profile!r}")
    p = PROFILES[profile]
    gs = list(geometries)
    sym = check_quadrature(q)
    if not sym.passed:
        return [sym]
    rng = np.random.default_rng(seed)
    return [
        sym,
        check_mapping(gs, q, p.n_mapping, p.mapping_tol, rng),
        check_ratio(gs, q, p.n_ratio, p.ratio_tol, rng),
        check_friction(gs, q, p.n_friction, rng),
        check_nullity(gs, q, p.n_nullity, rng),
        check_convergence(gs, q, p.n_convergence, p.convergence_tol, rng),
        check_agreement(gs, q, p.n_agreement, tol, p.agreement_min, rng),
    ]


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    return "\n".join(f"{r.status:4}  {r.name:<{width}}  {r.detail}" for r in results)
