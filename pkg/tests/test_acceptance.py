"""Acceptance suite. Each test prints one ``[NN] PASS|FAIL`` line, repeated in
the pytest terminal summary under "acceptance"."""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import report
from pegsim.contact import DEFAULT_QUADRATURE, QuadratureSpec, respond
from pegsim.geometry import FeatureVector
from pegsim.sim import Scenario, nominal_geometry, run_scenario, run_sweep
from pegsim.states import DEFAULT_TOLERANCES, XOZ, YOZ, ContactState
from pegsim.verify import (
    check_agreement,
    planar_ratio,
    sample_centred,
    sample_contacting,
    sample_inside_rhombus,
    sample_planar,
)

D = math.radians
FITS = ("clearance", "interference")
DX0 = 0.05e-3
TILT0 = D(2.0)
# initial deviations of the robustness set: (d_x, theta_y)
ROBUSTNESS_SET = ((-0.05e-3, D(2.0)), (-0.1e-3, D(-1.0)), (0.1e-3, D(-1.0)), (0.05e-3, D(2.0)))


@lru_cache(maxsize=None)
def clearance_run(theta0: float, controller: str):
    g = nominal_geometry("clearance")
    sc = Scenario(g, FeatureVector(d_x=DX0, theta_y=theta0), controller=controller)
    t0 = time.perf_counter()
    tr, m = run_scenario(sc)
    return tr, m, time.perf_counter() - t0


def residual(m, g) -> float:
    F = m.terminal_wrench
    return math.hypot(F[0], F[4] / g.R)


def test_01_zero_offset_gives_zero_lateral_force():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for fit in FITS:
        g = nominal_geometry(fit)
        for _ in range(200):
            x = sample_centred(rng, g)
            worst = max(worst, abs(respond(x, g).F_x) / (g.k * g.R * x.l))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 10.0
    report("01", ok, f"zero-offset F_x: max |F_x|/(k R l) = {worst:.2e} (<= 1e-9), {dt:.2f} s (< 10 s)")
    assert ok


def test_02_planar_moment_force_ratio():
    rng = np.random.default_rng(102)
    worst = 0.0
    count = 0
    for fit in FITS:
        g = nominal_geometry(fit)
        for _ in range(200):
            x = sample_planar(rng, g)
            w = respond(x, g)
            assert w.norm() > 0
            ref = planar_ratio(x.l, g)
            for F, M in ((w.F_x, w.M_y), (w.F_y, w.M_x)):
                if abs(F) > 1e-9 * w.norm():
                    worst = max(worst, abs(M / F - ref) / abs(ref))
                    count += 1
    ok = worst <= 1e-6
    report("02", ok, f"planar M/F ratio: max rel err = {worst:.2e} (<= 1e-6) over {count} plane pairs")
    assert ok


def test_03_lateral_to_axial_force_ratio_below_mu():
    rng = np.random.default_rng(103)
    worst = 0.0
    worst_abs = 0.0
    for fit in FITS:
        g = nominal_geometry(fit)
        for _ in range(500):
            _, w = sample_contacting(rng, g, DEFAULT_QUADRATURE)
            worst = max(worst, w.F_x / w.F_z, w.F_y / w.F_z)
            worst_abs = max(worst_abs, g.mu * math.hypot(w.F_x, w.F_y) / w.F_z)
    mu = nominal_geometry("clearance").mu
    ok = worst <= mu
    report(
        "03", ok,
        f"friction ratio: max F_lat/F_z = {worst:.3f} (<= mu = {mu}) on 1000 points; "
        f"max mu*|F_lat|/F_z = {worst_abs:.3f}",
    )
    assert ok


def test_04_no_contact_inside_clearance_rhombus():
    rng = np.random.default_rng(104)
    g = nominal_geometry("clearance")
    worst = 0.0
    touching = 0
    for i in range(200):
        x = sample_inside_rhombus(rng, g, XOZ if i % 2 == 0 else YOZ)
        n = respond(x, g).norm()
        touching += n > 0
        worst = max(worst, n)
    ok = worst == 0.0
    report("04", ok, f"rhombus nullity: {touching}/200 points in contact, max |wrench| = {worst:.2e} N (== 0)")
    assert ok


def test_05_quadrature_convergence():
    rng = np.random.default_rng(105)
    base = QuadratureSpec(64, 256)
    finer = base.refined(2)
    worst = 0.0
    for i in range(50):
        g = nominal_geometry(FITS[i % 2])
        x, w = sample_contacting(rng, g, base)
        a, b = w.as_array(), respond(x, g, finer).as_array()
        # components that vanish by symmetry are measured against the wrench scale
        scale = np.maximum(np.abs(b), 1e-6 * np.linalg.norm(b))
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    ok = worst < 1e-3
    report("05", ok, f"quadrature (64,256)->(128,512): max component change = {worst:.2e} (< 1e-3)")
    assert ok


def test_06_feature_and_response_labels_agree():
    rates = []
    for j, fit in enumerate(FITS):
        r = check_agreement(
            [nominal_geometry(fit)], DEFAULT_QUADRATURE, 1000, DEFAULT_TOLERANCES, 0.95, np.random.default_rng(106 + j)
        )
        rates.append(float(r.detail.split()[1].rstrip(",")))
    ok = min(rates) >= 0.95
    report("06", ok, "label agreement: " + ", ".join(f"{f} {r:.3f}" for f, r in zip(FITS, rates)) + " (>= 0.95)")
    assert ok


@pytest.mark.parametrize("sign", [1, -1], ids=["positive_tilt", "negative_tilt"])
def test_07_clearance_insertion_settles(sign):
    tr, m, dt = clearance_run(sign * TILT0, "fbcc")
    peak = m.peak_wrench
    rel_fx = abs(m.terminal_wrench[0]) / peak[0]
    rel_my = abs(m.terminal_wrench[4]) / peak[4]
    reached = tr.x_act[-1, 2] >= nominal_geometry("clearance").L
    final_p0 = m.final_state == (ContactState.P_0, ContactState.P_0)
    ok = m.success and reached and rel_fx <= 0.01 and rel_my <= 0.01 and final_p0 and dt < 5.0
    report(
        "07", ok,
        f"clearance theta_y0 = {sign * 2:+d} deg: reached l=L {reached}, terminal/peak F_x {rel_fx:.1e} "
        f"M_y {rel_my:.1e} (<= 1e-2), final {m.final_state[0]}/{m.final_state[1]}, {dt:.2f} s (< 5 s)",
    )
    assert ok


def test_08_no_tilt_misadjustment():
    limit = TILT0 + D(0.2)
    _, fb, _ = clearance_run(-TILT0, "fbcc")
    _, ad, _ = clearance_run(-TILT0, "admittance")
    ok = fb.max_abs_theta_y <= limit < ad.max_abs_theta_y
    report(
        "08", ok,
        f"tilt misadjustment at theta_y0 = -2 deg: fbcc max |theta_y| = {math.degrees(fb.max_abs_theta_y):.3f} deg "
        f"(<= 2.2), admittance {math.degrees(ad.max_abs_theta_y):.3f} deg (> 2.2)",
    )
    assert ok


def test_09_admittance_residual_exceeds_fbcc():
    g = nominal_geometry("clearance")
    parts = []
    ok = True
    for sign in (1, -1):
        _, fb, _ = clearance_run(sign * TILT0, "fbcc")
        _, ad, _ = clearance_run(sign * TILT0, "admittance")
        a, b = residual(ad, g), residual(fb, g)
        ok &= a >= 10.0 * b
        parts.append(f"{sign * 2:+d} deg: admittance {a:.3g} N vs fbcc {b:.3g} N (x{a / b if b else math.inf:.0f})")
    report("09", ok, "terminal residual " + "; ".join(parts) + " (>= x10)")
    assert ok


def test_10_robustness_sweep():
    t0 = time.perf_counter()
    failures = []
    for fit in FITS:
        for radius in (5e-3, 10e-3):
            g = nominal_geometry(fit, radius)
            for d, th in ROBUSTNESS_SET:
                _, m = run_scenario(Scenario(g, FeatureVector(d_x=d, theta_y=th)))
                if not (m.success and m.settled):
                    failures.append(f"{fit} R~{radius * 1e3:.0f}mm ({d * 1e3:+.2f} mm, {math.degrees(th):+.0f} deg)")
    fixed = time.perf_counter() - t0
    rep = run_sweep(Scenario(nominal_geometry("clearance"), seed=7), 20)
    total = time.perf_counter() - t0
    ok = not failures and rep.success_rate == 1.0 and rep.settled_rate == 1.0 and total < 120.0
    report(
        "10", ok,
        f"robustness: {16 - len(failures)}/16 fixed runs settle in P_0 (5 and 10 mm radius, both fits) in {fixed:.1f} s; "
        f"20-run random sweep success {rep.success_rate:.2f}, settled {rep.settled_rate:.2f}; total {total:.1f} s (< 120 s)",
    )
    assert ok, failures


def test_11_open_loop_wrench_grows_until_abort():
    g = nominal_geometry("clearance")
    sc = Scenario(g, FeatureVector(d_x=DX0, theta_y=TILT0), controller="open_loop", force_limit=50.0)
    tr, m = run_scenario(sc)
    first = int(np.argmax(tr.F[:, 2] > 0))
    mono = all(bool(np.all(np.diff(np.abs(tr.F[first:, c])) >= 0)) for c in (0, 4))
    ok = m.abort_reason == "force_abort" and tr.F[:, 2].max() > 0 and mono
    report(
        "11", ok,
        f"open loop: contact at tick {first}, |F_x| and |M_y| non-decreasing {mono}, "
        f"stop reason {m.abort_reason} at l = {tr.x_act[-1, 2] * 1e3:.3f} mm",
    )
    assert ok
