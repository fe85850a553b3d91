"""Command-line front end: ``ringoam <command> [--config FILE] [--set t.k=v] --out DIR``.

Exit status is 0 on success, 1 for invalid input and 2 when a run fails
(conservation, singularity, step budget, or I/O).
"""
import argparse
from importlib import resources
import math
from pathlib import Path
import sys

import numpy as np

from . import __version__, config as cfgmod, export
from .bogoliubov import stability_map
from .dynamics import IntegratorConfig, growth_rate_fit, integrate
from .errors import (ConfigError, ConservationError, ConstructionError, DegenerateWindowError,
                     IntegrationError, ParameterError, SingularityError)
from .josephson import (JosephsonState, RegimeSweep, integrate_josephson, lambda_critical,
                        regime_map)
from .model import build_initial_state
from .two_state import critical_points, max_transfer, phase_portrait

VALIDATION_ERRORS = (ConfigError, ParameterError, ConstructionError, DegenerateWindowError)
RUNTIME_ERRORS = (ConservationError, SingularityError, IntegrationError, OSError)


def _meta(cfg, **extra):
    return {"command": cfg.command, "config": cfg.raw, "version": __version__, **extra}


def _require(cfg, table, key):
    value = cfg.get(table, key)
    if value is None:
        raise ConfigError(f"{table}.{key} is required for {cfg.command}")
    return value


# -- commands ------------------------------------------------------------------

def cmd_simulate(cfg, out, jobs=1):
    params = cfgmod.make_params_from(cfg.section("params"))
    ini = cfg.section("initial")
    state = build_initial_state(params, ini.get("n", 0), ini.get("z0", 0.0),
                                ini.get("dphi0", 0.0), ini.get("perturbation_amplitude", 0.0),
                                ini.get("perturbation_span", 0))
    integ = cfg.section("integrator")
    if "t_end" not in integ:
        raise ConfigError("integrator.t_end is required for simulate")
    integ["store_amplitudes"] = cfg.get("output", "store_amplitudes", False)
    traj = integrate(state, params, IntegratorConfig(**integ))

    N = params.n_total
    peaks = {}
    for m in traj.modes:
        peaks[int(m)] = {
            "up": float(traj.mode_population(m, 0).max() / N),
            "down": float(traj.mode_population(m, 1).max() / N),
            "total": float(traj.mode_population(m).max() / N),
        }
    summary = {
        "params": params.as_dict(),
        "backend": traj.backend,
        "n_samples": len(traj),
        "n_steps": traj.n_steps,
        "n_rejected": traj.n_rejected,
        "tau_end": float(traj.taus[-1]),
        "max_drift_norm": traj.max_drift[0],
        "max_drift_momentum": traj.max_drift[1],
        "peak_fraction": peaks,
        "peak_perturbed_fraction": float(traj.perturbed_fraction(ini.get("n", 0)).max()),
    }
    if cfg.has("growth"):
        g = cfg.section("growth")
        ring = {"up": 0, "down": 1, "both": None}.get(g.get("ring", "both"), "bad")
        if ring == "bad":
            raise ConfigError("growth.ring must be up, down or both")
        m = g.get("m", 1)
        window = g.get("window")
        if window is None or len(window) != 2:
            raise ConfigError("growth.window must be [tau_a, tau_b]")
        summary["growth_rate"] = {"m": m, "window": window, "ring": g.get("ring", "both"),
                                  "rate": growth_rate_fit(traj, m, window, ring)}
    meta = _meta(cfg, params=params.as_dict(), backend=traj.backend)
    cols, rows = export.trajectory_table(traj)
    return [export.write_csv(out / "trajectory.csv", meta, cols, rows),
            export.write_json(out / "summary.json", summary)]


def cmd_bogoliubov_map(cfg, out, jobs=1):
    k = _require(cfg, "axes", "kappa")
    e = _require(cfg, "axes", "epsilon")
    modes = cfg.get("axes", "modes", [1, 2, 3])
    smap = stability_map(k, e, modes)
    cols, rows = export.stability_table(smap)
    return [export.write_csv(out / "stability_map.csv", _meta(cfg, modes=list(smap.modes)),
                             cols, rows)]


def _two_state_setup(cfg):
    params = cfgmod.make_params_from(cfg.section("params"))
    m = cfg.get("two_state", "m", 1)
    return params, m


def _cp_report(cps, n_total):
    return [cp.as_dict(n_total) for cp in cps]


def cmd_portrait(cfg, out, jobs=1):
    params, m = _two_state_setup(cfg)
    nx = cfg.get("two_state", "x_points", 401)
    nz = cfg.get("two_state", "zeta_points", 361)
    if nx < 2 or nz < 2:
        raise ConfigError("two_state.x_points and zeta_points must be >= 2")
    N = params.n_total
    pp = phase_portrait(params, m, np.linspace(0.0, N / 4, nx), np.linspace(0.0, 2 * math.pi, nz))
    xmax, zmax = pp.zero_level_max()
    summary = {
        "params": params.as_dict(), "m": m,
        "families": sorted({cp.family for cp in pp.critical_points}),
        "zero_level_max": {"x_over_N": xmax / N, "zeta": zmax},
    }
    try:
        summary["max_transfer"] = max_transfer(params, m)
    except ParameterError:
        summary["max_transfer"] = None
    cols, rows = export.portrait_table(pp, N)
    meta = _meta(cfg, params=params.as_dict(), m=m)
    return [export.write_csv(out / "portrait.csv", meta, cols, rows),
            export.write_json(out / "critical_points.json", _cp_report(pp.critical_points, N)),
            export.write_json(out / "portrait_summary.json", summary)]


def cmd_critical_points(cfg, out, jobs=1):
    params, m = _two_state_setup(cfg)
    cps = critical_points(params, m)
    families = sorted({cp.family for cp in cps})
    print(f"{len(families)} families: {', '.join(families) or 'none'}")
    return [export.write_json(out / "critical_points.json", _cp_report(cps, params.n_total))]


def cmd_regime_map(cfg, out, jobs=1):
    k = _require(cfg, "axes", "kappa")
    e = _require(cfg, "axes", "epsilon")
    sw = cfg.section("sweep")
    if "z0" not in sw:
        raise ConfigError("sweep.z0 is required for regime-map")
    z0 = sw.pop("z0")
    integ = cfg.section("integrator")
    tau_max = sw.get("tau_max", 100.0)
    sweep = RegimeSweep(**sw, integrator=IntegratorConfig(t_end=tau_max, **integ))
    rmap = regime_map(k, e, z0, sweep, jobs=jobs)
    cols, rows = export.regime_table(rmap)
    failed = [c for c in rmap.flat() if c.label == "error"]
    for c in failed:
        print(f"cell kappa={c.kappa:g} epsilon={c.epsilon:g} failed: {c.error}", file=sys.stderr)
    return [export.write_csv(out / "regime_map.csv", _meta(cfg, z0=z0), cols, rows)]


def cmd_josephson(cfg, out, jobs=1):
    written = []
    do_traj = cfg.has("trajectory") or not cfg.has("boundary")
    do_bound = cfg.has("boundary") or not cfg.has("trajectory")
    summary = {}
    if do_traj:
        t = cfg.section("trajectory")
        z0, dphi0 = t.get("z0", 0.6), t.get("dphi0", 0.0)
        lambdas = t.get("lambdas", [4.0, 10.0, 24.0])
        s_end, stride = t.get("s_end", 50.0), t.get("stride", 0.01)
        if z0 != 0:
            lc = lambda_critical(z0, dphi0)
            summary["lambda_critical"] = lc
            print(f"lambda_critical(z0={z0!r}, dphi0={dphi0!r}) = {lc!r}")
        runs = []
        for lam in lambdas:
            jt = integrate_josephson(JosephsonState(z0, dphi0), lam, s_end, stride=stride)
            cols, rows = export.josephson_table(jt)
            meta = _meta(cfg, z0=z0, dphi0=dphi0, lam=lam)
            written.append(export.write_csv(
                out / f"josephson_lambda_{export.fmt(lam)}.csv", meta, cols, rows))
            runs.append({"lambda": lam, "crosses_zero": jt.crosses_zero(),
                         "min_z": float(jt.z.min()), "mean_z": float(jt.z.mean()),
                         "h_drift": jt.h_drift})
        summary["trajectories"] = runs
    if do_bound:
        b = cfg.section("boundary")
        z_axis = b.get("z0")
        if z_axis is None:
            z_axis = np.linspace(0.01, 1.0, 100)
        phases = b.get("dphi0", [0.0, math.pi / 2, 3 * math.pi / 4, math.pi - 1e-6])
        rows = [[float(z), float(p), lambda_critical(float(z), float(p))]
                for p in phases for z in z_axis]
        written.append(export.write_csv(out / "lambda_critical.csv", _meta(cfg),
                                        ["z0", "dphi0", "lambda_c"], rows))
    written.append(export.write_json(out / "josephson_summary.json", summary))
    return written


COMMANDS = {
    "simulate": cmd_simulate,
    "bogoliubov-map": cmd_bogoliubov_map,
    "portrait": cmd_portrait,
    "critical-points": cmd_critical_points,
    "regime-map": cmd_regime_map,
    "josephson": cmd_josephson,
}


def manifests():
    """Shipped run manifests, ``{name: path}`` in name order."""
    root = resources.files("ringoam") / "manifests"
    return {p.name[:-5]: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".toml")}


def cmd_reproduce(only, out, jobs=1, list_only=False):
    found = manifests()
    if list_only:
        for name, path in found.items():
            print(name)
        return []
    names = only or list(found)
    unknown = [n for n in names if n not in found]
    if unknown:
        raise ConfigError(f"unknown manifest(s) {unknown}; have {list(found)}")
    written = []
    for name in names:
        with open(found[name], "rb") as fh:
            doc = cfgmod.tomllib.load(fh)
        command = doc.get("command")
        if command not in COMMANDS:
            raise ConfigError(f"manifest {name} has no valid command")
        cfg = cfgmod.build(command, doc)
        print(f"[{name}] {command}")
        written += COMMANDS[command](cfg, out / name, jobs)
    return written


def build_parser():
    parser = argparse.ArgumentParser(prog="ringoam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ringoam {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="ringoam-out", type=Path, help="output directory")
        p.add_argument("--jobs", default=1, type=int, help="worker processes for sweeps")

    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="TOML run file")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="TABLE.KEY=VALUE", help="override a config value")
        common(p)
    p = sub.add_parser("reproduce", help="run the shipped reproduction manifests")
    p.add_argument("--only", action="append", default=[], metavar="NAME")
    p.add_argument("--list", action="store_true", help="list manifests and exit")
    common(p)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.command == "reproduce":
            written = cmd_reproduce(args.only, args.out, args.jobs, args.list)
        else:
            cfg = cfgmod.load(args.command, args.config, args.overrides)
            written = COMMANDS[args.command](cfg, args.out, args.jobs)
    except VALIDATION_ERRORS as exc:
        print(f"ringoam: invalid input: {exc}", file=sys.stderr)
        return 1
    except RUNTIME_ERRORS as exc:
        print(f"ringoam: run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
