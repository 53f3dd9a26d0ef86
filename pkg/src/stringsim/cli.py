"""Scenario runner and acceptance entry point.

Verbs:
    run <config>      execute a quench scenario (TOML), write CSV/JSON artifacts
    accept            run the acceptance criteria, print one line each
    calibrate         synthesize the ion-chain coupling matrix and fit report
    thermal <config>  compute canonical baselines for a scenario

Exit codes: 0 ok, 1 criteria/runtime failure, 2 configuration error.
Identical config + seed gives byte-identical CSV output; only the manifest
carries a timestamp.  STRINGSIM_THREADS (or --threads) caps how many grid
points run concurrently.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import os
import sys
import time
from importlib import resources

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, acceptance
from . import couplings as cpl
from . import evolve as ev
from . import model as md
from . import thermal as th
from . import twobody as tb
from .errors import ConfigError, StringSimError

RESONANCE_TOL = 0.02  # |V| < tol * J flags a resonant pair configuration


# Config handling -------------------------------------------------------------

def _config_text(path: str) -> str:
    if os.path.exists(path):
        with open(path, "rb") as f:
            return f.read().decode("utf-8")
    name = path if path.endswith(".toml") else path + ".toml"
    ref = resources.files("stringsim") / "scenarios" / os.path.basename(name)
    if ref.is_file():
        return ref.read_text()
    raise ConfigError(f"config not found: {path!r} (not a file or bundled scenario)")


def _require(table: dict, section: str, key: str, types, default=None):
    if key not in table:
        if default is not None:
            return default
        raise ConfigError(f"{section}.{key}: missing required key")
    val = table[key]
    if not isinstance(val, types) or isinstance(val, bool) and bool not in (
            types if isinstance(types, tuple) else (types,)):
        raise ConfigError(f"{section}.{key}: expected {types}, got {type(val).__name__}")
    return val


def _as_grid(val, section, key):
    vals = val if isinstance(val, list) else [val]
    out = []
    for v in vals:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"{section}.{key}: entries must be numbers >= 0")
        out.append(float(v))
    if not out:
        raise ConfigError(f"{section}.{key}: empty grid")
    return out


def load_config(path: str, overrides=()) -> dict:
    """Parse and validate a scenario TOML file into a plain dict."""
    try:
        data = tomllib.loads(_config_text(path))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"--set {ov!r}: expected section.key=value")
        dotted, raw = ov.split("=", 1)
        parts = dotted.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"--set {ov!r}: expected section.key=value")
        try:
            val = tomllib.loads(f"x = {raw}")["x"]
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"--set {ov!r}: bad value: {exc}") from exc
        data.setdefault(parts[0], {})[parts[1]] = val

    sc = data.get("scenario")
    if not isinstance(sc, dict):
        raise ConfigError("scenario: missing [scenario] table")
    pr = data.get("protocol", {})
    out = data.get("outputs", {})

    name = _require(sc, "scenario", "name", str)
    L = _require(sc, "scenario", "L", int)
    if not 1 <= L <= md.L_MAX:
        raise ConfigError(f"scenario.L: must be in 1..{md.L_MAX}")
    beta = float(_require(sc, "scenario", "beta", (int, float)))
    if beta <= 0:
        raise ConfigError("scenario.beta: must be positive")
    env = _require(sc, "scenario", "environment", str)
    if env not in md.ENVIRONMENTS:
        raise ConfigError(f"scenario.environment: must be one of {md.ENVIRONMENTS}")
    g_grid = _as_grid(sc.get("g_over_J", 0.0), "scenario", "g_over_J")
    h_grid = _as_grid(sc.get("h_over_J", 0.0), "scenario", "h_over_J")

    t_max = float(_require(pr, "protocol", "t_max", (int, float), 3.0))
    if t_max <= 0:
        raise ConfigError("protocol.t_max: must be positive")
    n_times = _require(pr, "protocol", "n_times", int, 61)
    if n_times < 2:
        raise ConfigError("protocol.n_times: need at least 2 samples")
    shots = _require(pr, "protocol", "shots", int, 0)
    if shots < 0:
        raise ConfigError("protocol.shots: must be >= 0")
    seed = _require(pr, "protocol", "seed", int, 0)

    fits = out.get("fits", [])
    if not isinstance(fits, list) or any(f not in ("bloch", "light_cone") for f in fits):
        raise ConfigError("outputs.fits: list drawn from ['bloch', 'light_cone']")

    return {
        "name": name, "L": L, "beta": beta, "environment": env,
        "g_over_J": g_grid, "h_over_J": h_grid,
        "t_max": t_max, "n_times": n_times, "shots": shots, "seed": seed,
        "maps": bool(out.get("maps", True)), "fits": fits,
        "twobody": bool(out.get("twobody", False)),
        "thermal": bool(out.get("thermal", False)),
    }


def point_hash(cfg: dict, g: float, h: float, seed: int) -> str:
    """Short content hash identifying one grid point of a scenario."""
    key = {k: cfg[k] for k in ("name", "L", "beta", "environment",
                               "t_max", "n_times", "shots")}
    key.update(g_over_J=g, h_over_J=h, seed=seed)
    blob = json.dumps(key, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


# Artifact writers ------------------------------------------------------------

def _fmt(x) -> str:
    return "" if x == "" else f"{float(x):.12g}"


def write_map_csv(path, qmap, label_name, value_name):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["time", label_name, value_name, "stderr"])
        for t, lab, val, err in qmap.to_rows():
            w.writerow([_fmt(t), int(lab), _fmt(val), _fmt(err)])


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def run_point(cfg: dict, g: float, h: float, out_root: str) -> str:
    """Execute one (g, h) grid point; returns the output directory."""
    t_start = time.time()
    digest = point_hash(cfg, g, h, cfg["seed"])
    outdir = os.path.join(out_root, cfg["name"], digest)
    os.makedirs(outdir, exist_ok=True)
    L, beta, env = cfg["L"], cfg["beta"], cfg["environment"]
    spec = md.scenario_spec(L, beta, g, h, env)
    config = md.initial_configuration(env, L)
    times = np.linspace(0.0, cfg["t_max"], cfg["n_times"])

    files = []
    fits = {}
    if cfg["shots"] > 0:
        qmap, emap, states = ev.sampled_maps(config, spec, times,
                                             cfg["shots"], cfg["seed"])
    else:
        qmap, emap, states = ev.run_quench(config, spec, times)
    if cfg["maps"]:
        write_map_csv(os.path.join(outdir, "qmap.csv"), qmap, "bond", "q")
        write_map_csv(os.path.join(outdir, "emap.csv"), emap, "site", "eps")
        files += ["qmap.csv", "emap.csv"]

    exact_qmap = qmap
    if cfg["shots"] > 0 and (cfg["fits"] or cfg["twobody"]):
        exact_qmap, _, _ = ev.run_quench(config, spec, times)
    if "light_cone" in cfg["fits"]:
        v, resid = ev.fit_light_cone(exact_qmap)
        fits["light_cone"] = {"velocity": v, "residual": resid,
                              "predicted": 2.0 * g}
    if "bloch" in cfg["fits"]:
        amp, period, errs = ev.fit_bloch(exact_qmap)
        fits["bloch"] = {"amplitude": amp, "period": period,
                         "predicted_amplitude": 2.0 * g / h if h > 0 else None,
                         "predicted_period": float(np.pi / h) if h > 0 else None,
                         **errs}

    if cfg["twobody"] and env == "string":
        basis = tb.PairBasis(L)
        V = tb.potential_matrix(basis, 1.0, beta, h)
        resonant = set(tb.resonant_configs(basis, V, RESONANCE_TOL))
        with open(os.path.join(outdir, "twobody.csv"), "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["l1", "l2", "V", "resonant"])
            for k, (l1, l2) in enumerate(basis.pairs):
                w.writerow([l1, l2, _fmt(V[k]), int((l1, l2) in resonant)])
        files.append("twobody.csv")
        if g > 0:
            s0 = tb.initial_pair_state(g, basis, V)
            heff = tb.build_heff(g, basis, V)
            pb = [tb.broken_probability(s, s0)
                  for s in tb.evolve_pair(s0, heff, times)]
            fits["twobody"] = {"times": [float(t) for t in times],
                               "p_broken": pb}

    if cfg["thermal"]:
        files.append(write_thermal_csv(outdir, spec, config, states, fits))

    _write_json(os.path.join(outdir, "fits.json"), fits)
    files.append("fits.json")
    manifest = {
        "name": cfg["name"], "spec_hash": digest, "seed": cfg["seed"],
        "parameters": {"L": L, "beta": beta, "g_over_J": g, "h_over_J": h,
                       "environment": env, "t_max": cfg["t_max"],
                       "n_times": cfg["n_times"], "shots": cfg["shots"]},
        "versions": {"python": sys.version.split()[0],
                     "numpy": np.__version__,
                     "scipy": __import__("scipy").__version__,
                     "stringsim": __version__},
        "wall_time_s": round(time.time() - t_start, 3),
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "files": sorted(files),
    }
    _write_json(os.path.join(outdir, "manifest.json"), manifest)
    return outdir


def write_thermal_csv(outdir, spec, config, states, fits) -> str:
    """Gibbs baseline matched to the quench energy, next to the evolved field."""
    E0 = md.classical_energy(config, spec)
    spectral = th.spectrum(spec)
    T = th.match_temperature(E0, spectral)
    eps_gibbs = th.gibbs_observable(spectral, T)
    eps_final = ev.electric_field(states[-1])
    with open(os.path.join(outdir, "thermal.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["site", "eps_thermal", "eps_evolved"])
        for site, eg, ef in zip(spec.sites, eps_gibbs, eps_final):
            w.writerow([int(site), _fmt(eg), _fmt(ef)])
    fits["thermal"] = {"temperature": None if np.isinf(T) else float(T),
                       "quench_energy": float(E0)}
    return "thermal.csv"


# Verbs -----------------------------------------------------------------------

def _thread_count(args) -> int:
    if args.threads:
        return max(1, args.threads)
    env = os.environ.get("STRINGSIM_THREADS")
    return max(1, int(env)) if env else 1


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.set or ())
    if args.seed is not None:
        cfg["seed"] = args.seed
    points = [(g, h) for g in cfg["g_over_J"] for h in cfg["h_over_J"]]
    workers = min(_thread_count(args), len(points))
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(workers) as pool:
            dirs = list(pool.map(lambda p: run_point(cfg, *p, args.out), points))
    else:
        dirs = [run_point(cfg, g, h, args.out) for g, h in points]
    for d in sorted(dirs):
        print(d)
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run_all(args.only or None)
    for r in results:
        print(r.line())
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "acceptance.json"),
                    [{"name": r.name, "passed": r.passed,
                      "runtime_s": round(r.runtime, 2), "details": r.details}
                     for r in results])
    return 0 if all(r.passed for r in results) else 1


def cmd_calibrate(args) -> int:
    r = cpl.synthesize_couplings()
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "couplings.csv")
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        n = r.n_active
        w.writerow(["# J_ij in rad/s, active ions, stagger-corrected"])
        w.writerow(["i", "j", "J_ij"])
        for i in range(n):
            for j in range(n):
                w.writerow([i, j, _fmt(r.couplings[i, j])])
    J1, beta, alpha, rms = r.fit
    _write_json(os.path.join(args.out, "calibration.json"), {
        "fit": {"J1_radps": J1, "beta": beta, "alpha": alpha, "rms_log_residual": rms},
        "nn_mean_radps": r.nn_mean, "nn_relative_spread": r.nn_spread,
        "nnn_over_nn": r.nnn_ratio,
        "beam_rabi_radps": [float(x) for x in r.beams.rabi],
        "mode_frequencies_radps": [float(x) for x in r.modes.frequencies],
        "positions_m": [float(x) for x in r.positions],
    })
    print(path)
    print(f"beta={beta:.3f} alpha={alpha:.3f} "
          f"nn_spread={r.nn_spread:.4f} nnn/nn={r.nnn_ratio:.3f}")
    return 0


def cmd_thermal(args) -> int:
    cfg = load_config(args.config, args.set or ())
    for g in cfg["g_over_J"]:
        for h in cfg["h_over_J"]:
            digest = point_hash(cfg, g, h, cfg["seed"])
            outdir = os.path.join(args.out, cfg["name"], digest)
            os.makedirs(outdir, exist_ok=True)
            spec = md.scenario_spec(cfg["L"], cfg["beta"], g, h, cfg["environment"])
            config = md.initial_configuration(cfg["environment"], cfg["L"])
            times = np.linspace(0.0, cfg["t_max"], cfg["n_times"])
            states = ev.evolve_to_times(ev.prepare_state(config), spec,
                                        [times[-1]])
            fits = {}
            write_thermal_csv(outdir, spec, config, states, fits)
            _write_json(os.path.join(outdir, "thermal.json"), fits["thermal"])
            print(os.path.join(outdir, "thermal.csv"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stringsim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--out", default="out", help="output root directory")
        sp.add_argument("--seed", type=int, default=None, help="override protocol seed")
        sp.add_argument("--threads", type=int, default=None,
                        help="grid parallelism cap (default STRINGSIM_THREADS or 1)")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config key (repeatable)")

    sp = sub.add_parser("run", help="execute a quench scenario")
    sp.add_argument("config", help="TOML path or bundled scenario name")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("accept", help="run the acceptance criteria")
    sp.add_argument("--out", default=None, help="write acceptance.json here")
    sp.add_argument("--only", action="append", metavar="SUBSTRING",
                    help="run only criteria whose name contains this (repeatable)")
    sp.set_defaults(func=cmd_accept)

    sp = sub.add_parser("calibrate", help="synthesize the ion coupling matrix")
    sp.add_argument("--out", default="out", help="output directory")
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("thermal", help="compute canonical baselines for a scenario")
    sp.add_argument("config", help="TOML path or bundled scenario name")
    common(sp)
    sp.set_defaults(func=cmd_thermal)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StringSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
