"""Command-line front end.

    pegsim simulate <config.json> [--out DIR]
    pegsim compare  <config.json> [--out DIR]
    pegsim map      <config.json> [--out DIR]
    pegsim sweep    <config.json> [--n N] [--seed S] [--out DIR]
    pegsim verify   [config.json] [--tol-profile default|strict]

Exit codes: 0 success, 1 usage or config error, 2 simulated abort,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import svg
from .contact import Geometry, QuadratureSpec, respond
from .errors import ConfigError, InconsistentWrench, PegSimError
from .geometry import FeatureVector
from .sim import Trajectory, nominal_geometry, run_scenario, run_sweep
from .states import XOZ, BoundaryTolerances, classify_features, classify_responses, plane_responses, response_coordinates
from .verify import PROFILES, format_table, run_checks

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_VERIFY = 0, 1, 2, 3

FEATURES = ("d_x", "d_y", "l", "theta_x", "theta_y")
RESPONSES = ("F_x", "F_y", "F_z", "M_x", "M_y")
TRAJECTORY_COLUMNS = (
    ("t",) + FEATURES + RESPONSES + ("state_xoz", "state_yoz") + tuple(f"x_d_{n}" for n in FEATURES) + ("gamma",)
)
CONTROLLERS = ("fbcc", "admittance", "open_loop")
MAX_PLOT_POINTS = 2000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def num(v) -> str:
    """Locale-independent, round-trip float text."""
    return repr(float(v))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_trajectory_csv(path: Path, tr: Trajectory) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(tr)):
            w.writerow(
                [num(tr.t[i])]
                + [num(v) for v in tr.x_act[i]]
                + [num(v) for v in tr.F[i]]
                + [tr.state_xoz[i].value, tr.state_yoz[i].value]
                + [num(v) for v in tr.x_d[i]]
                + [num(tr.gamma[i])]
            )


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n", encoding="utf-8")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    return str(o)


def _stride(n: int) -> int:
    return max(1, math.ceil(n / MAX_PLOT_POINTS))


def trajectory_panels(runs: dict) -> tuple[list, list]:
    """Feature and response panels for one or more labelled trajectories."""
    multi = len(runs) > 1
    feats = [
        svg.Panel(title="lateral offset", xlabel="t [s]", ylabel="mm"),
        svg.Panel(title="insertion depth", xlabel="t [s]", ylabel="mm"),
        svg.Panel(title="tilt", xlabel="t [s]", ylabel="deg"),
    ]
    resps = [
        svg.Panel(title="forces", xlabel="t [s]", ylabel="N"),
        svg.Panel(title="moments", xlabel="t [s]", ylabel="N*m"),
    ]
    for name, tr in runs.items():
        k = _stride(len(tr))
        t = tr.t[::k]
        X, F = tr.x_act[::k], tr.F[::k]
        tag = f"{name} " if multi else ""
        feats[0].series += [svg.Series(t, X[:, 0] * 1e3, tag + "d_x"), svg.Series(t, X[:, 1] * 1e3, tag + "d_y")]
        feats[1].series.append(svg.Series(t, X[:, 2] * 1e3, tag + "l"))
        feats[2].series += [
            svg.Series(t, np.degrees(X[:, 3]), tag + "theta_x"),
            svg.Series(t, np.degrees(X[:, 4]), tag + "theta_y"),
        ]
        resps[0].series += [svg.Series(t, F[:, j], tag + RESPONSES[j]) for j in range(3)]
        resps[1].series += [svg.Series(t, F[:, j], tag + RESPONSES[j]) for j in (3, 4)]
    return feats, resps


def _prepare(args) -> tuple[cfgmod.RunConfig, Path]:
    cfg = cfgmod.load(args.config)
    # reject a bad scenario before anything is written
    cfg.simulation().validate()
    out = cfgmod.output_dir(args.out, cfg)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def cmd_simulate(args) -> int:
    cfg, out = _prepare(args)
    sc = cfg.simulation()
    sc.validate()
    tr, m = run_scenario(sc)
    write_trajectory_csv(out / "trajectory.csv", tr)
    write_json(out / "metrics.json", m.to_dict())
    if cfg.plots:
        feats, resps = trajectory_panels({sc.controller: tr})
        svg.write(out / "features.svg", feats, title="features")
        svg.write(out / "responses.svg", resps, title="responses")
    print(f"{sc.controller}: {'success' if m.success else m.abort_reason} after {len(tr)} ticks, "
          f"final state {m.final_state[0].value}/{m.final_state[1].value}; output in {out}")
    return EXIT_OK if m.success else EXIT_ABORT


def _comparison_csv(path: Path, runs: dict, dt: float) -> None:
    names = list(runs)
    n = max(len(tr) for tr in runs.values())
    cols = ["t"]
    for c in names:
        cols += [f"{c}_{f}" for f in FEATURES + RESPONSES] + [f"{c}_state_xoz", f"{c}_state_yoz"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(cols)
        for i in range(n):
            row = [num(i * dt)]
            for c in names:
                tr = runs[c]
                if i < len(tr):
                    row += [num(v) for v in tr.x_act[i]] + [num(v) for v in tr.F[i]]
                    row += [tr.state_xoz[i].value, tr.state_yoz[i].value]
                else:
                    row += [""] * 12
            w.writerow(row)


def cmd_compare(args) -> int:
    cfg, out = _prepare(args)
    base = cfg.simulation()
    runs, metrics = {}, {}
    for c in CONTROLLERS:
        sc = replace(base, controller=c)
        sc.validate()
        runs[c], m = run_scenario(sc)
        metrics[c] = m.to_dict()
        res = m.terminal_wrench
        metrics[c]["terminal_residual"] = float(math.hypot(res[0], res[4] / sc.geometry.R))
        print(f"{c:10s} {'success' if m.success else m.abort_reason:12s} residual {metrics[c]['terminal_residual']:.4g}")
    _comparison_csv(out / "comparison.csv", runs, base.dt)
    write_json(out / "comparison.json", metrics)
    if cfg.plots:
        feats, resps = trajectory_panels(runs)
        svg.write(out / "comparison_features.svg", feats, title="features by controller")
        svg.write(out / "comparison_responses.svg", resps, title="responses by controller")
    return EXIT_OK


def region_map(
    g: Geometry,
    plane: str,
    l: float,
    d_range: float,
    theta_range: float,
    n_d: int,
    n_theta: int,
    q: QuadratureSpec,
    tol: BoundaryTolerances,
) -> list[dict]:
    """Labels and response coordinates on a (d, theta) grid at depth ``l``."""
    rows = []
    for d in np.linspace(-d_range, d_range, n_d):
        for th in np.linspace(-theta_range, theta_range, n_theta):
            d, th = float(d), float(th)
            x = FeatureVector(d_x=d, l=l, theta_y=th) if plane == XOZ else FeatureVector(d_y=d, l=l, theta_x=th)
            F_lat, F_z, M = plane_responses(respond(x, g, q).as_array(), plane)
            try:
                resp = classify_responses(plane, F_lat, F_z, M, l, g, tol, strict=False).value
            except InconsistentWrench:
                resp = "undefined"
            u, v = response_coordinates(F_lat, F_z, M, g)
            rows.append({
                "l": l, "d": d, "theta": th,
                "feature_state": classify_features(plane, d, l, th, g).value,
                "response_state": resp,
                "F": F_lat, "F_z": F_z, "M": M, "u": u, "v": v,
            })
    return rows


def _scatter_by(rows, key, x, y, xs=1.0, ys=1.0):
    groups = {}
    for r in rows:
        groups.setdefault(r[key], []).append((r[x] * xs, r[y] * ys))
    return [svg.Series(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]), name)
            for name, pts in sorted(groups.items())]


def cmd_map(args) -> int:
    cfg, out = _prepare(args)
    sc = cfg.simulation()
    sc.quadrature.validate()
    mp, g = cfg.map, sc.geometry
    cell = (2 * mp.d_range / (mp.n_d - 1)) * (2 * mp.theta_range / (mp.n_theta - 1))
    cols = ("l", "d", "theta", "feature_state", "response_state", "F", "F_z", "M", "u", "v")
    summary, panels = [], []
    with open(out / "regions.csv", "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(cols)
        for l in mp.depths:
            if not 0 < l <= g.L:
                raise ConfigError(f"map.depths: {l} m lies outside (0, L]")
            rows = region_map(g, mp.plane, l, mp.d_range, mp.theta_range, mp.n_d, mp.n_theta, sc.quadrature, sc.tolerances)
            for r in rows:
                w.writerow([r[c] if isinstance(r[c], str) else num(r[c]) for c in cols])
            n_feat = sum(r["feature_state"] == "P_0" for r in rows)
            n_resp = sum(r["response_state"] == "P_0" for r in rows)
            c = g.R - g.r
            summary.append({
                "l": l,
                "p0_cells_feature": n_feat,
                "p0_cells_response": n_resp,
                "p0_area_feature": n_feat * cell,
                "p0_area_response": n_resp * cell,
                "rhombus_area": 4.0 * c * c / l if c > 0 else 0.0,
            })
            panels.append(svg.Panel(_scatter_by(rows, "feature_state", "d", "theta", 1e3, 180 / math.pi),
                                    f"feature labels, l = {l * 1e3:.3g} mm", "d [mm]", "theta [deg]", "scatter"))
            contact = [r for r in rows if math.isfinite(r["u"])]
            panels.append(svg.Panel(_scatter_by(contact, "response_state", "u", "v"),
                                    f"response labels, l = {l * 1e3:.3g} mm", "F/F_z", "M/(R F_z)", "scatter"))
    write_json(out / "map_summary.json", {"plane": mp.plane, "cell_area": cell, "depths": summary})
    if cfg.plots:
        svg.write(out / f"map_{mp.plane}.svg", panels, panel_height=260.0, title=f"state regions, {mp.plane}")
    for s in summary:
        print(f"l = {s['l'] * 1e3:.3g} mm: P_0 area {s['p0_area_feature']:.4g} (features), "
              f"{s['p0_area_response']:.4g} (responses) m*rad")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, out = _prepare(args)
    sc = cfg.simulation()
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    sc.validate()
    n = args.n if args.n is not None else cfg.sweep.n
    rep = run_sweep(sc, n, cfg.sweep.lateral, cfg.sweep.tilt)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(("run", "d_x0", "d_y0", "theta_x0", "theta_y0", "success", "abort_reason", "settled",
                    "settling_time", "terminal_wrench_norm", "peak_F_z"))
        for i, (dev, m) in enumerate(zip(rep.deviations, rep.metrics)):
            w.writerow([i, num(dev[0]), num(dev[1]), num(dev[3]), num(dev[4]), int(m.success), m.abort_reason or "",
                        int(m.settled), "" if m.settling_time is None else num(m.settling_time),
                        num(np.linalg.norm(m.terminal_wrench)), num(m.peak_wrench[2])])
    summary = rep.summary()
    summary["seed"] = sc.seed
    write_json(out / "sweep.json", summary)
    print(f"sweep of {n}: success rate {rep.success_rate:.3f}, settled rate {rep.settled_rate:.3f}")
    return EXIT_OK if rep.success_rate == 1.0 else EXIT_ABORT


def cmd_verify(args) -> int:
    if args.config:
        cfg = cfgmod.load(args.config)
        q = cfg.verify_quadrature()
        gs = [cfg.scenario.geometry] if cfg.geometry_given else [nominal_geometry("clearance"), nominal_geometry("interference")]
        tol = cfg.scenario.tolerances
    else:
        q = cfgmod.DEFAULT_QUADRATURE
        gs = [nominal_geometry("clearance"), nominal_geometry("interference")]
        tol = cfgmod.DEFAULT_TOLERANCES
    results = run_checks(gs, q, args.tol_profile, tol, seed=args.seed)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pegsim", description="Peg-in-hole contact model, state classifiers and compliance control.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn, helptext in (
        ("simulate", cmd_simulate, "run one scenario"),
        ("compare", cmd_compare, "run fbcc, admittance and open loop on one scenario"),
        ("map", cmd_map, "label a (d, theta) grid at fixed depths"),
        ("sweep", cmd_sweep, "randomized initial deviations"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("config")
        s.add_argument("--out", help="output directory (overrides $PEGSIM_OUT and the config)")
        s.set_defaults(func=fn)
        if name == "sweep":
            s.add_argument("--n", type=int, help="number of runs")
            s.add_argument("--seed", type=int, help="seed of the deviation draw")
    v = sub.add_parser("verify", help="invariant checks of the contact model and classifiers")
    v.add_argument("config", nargs="?")
    v.add_argument("--tol-profile", choices=sorted(PROFILES), default="default")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    if getattr(args, "n", None) is not None and args.n < 1:
        print("pegsim: error: --n must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"pegsim: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except PegSimError as e:
        print(f"pegsim: run aborted: {e}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
