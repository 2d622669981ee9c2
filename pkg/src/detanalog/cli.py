"""Command-line entry point: ``detanalog <experiment> --config <path>``."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io
from .config import EXPERIMENTS, ConfigError, RunConfig, parse_config, with_experiment
from .model import DomainError, IntegrationError
from .solver import ConfigurationError, Domain, Perturbation, SolverOptions, StepError, init_from_znd, run
from .sootfoil import TraceAccumulator, TraceCallback, cell_metrics, render_pgm
from .stability import SearchBox, dispersion_curve, find_roots
from .steady import (CLOSURES, GridSpec, ProfileError, closure_distance,
                     compute_asymptotic_profile, compute_znd_profile)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS, EXIT_IO = 0, 2, 3, 4


class NumericsError(RuntimeError):
    pass


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for pkg in ("artifact", "numpy", "scipy", "numba"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _tag(value: float) -> str:
    return repr(float(value)).replace(".", "p").replace("-", "m")


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec(n=cfg.numerics["grid_n"], stretch=cfg.numerics["grid_stretch"])


def _box(cfg: RunConfig) -> SearchBox:
    n = cfg.numerics
    return SearchBox(re=(n["box_re_min"], n["box_re_max"]), im=(n["box_im_min"], n["box_im_max"]),
                     n_re=n["n_re"], n_im=n["n_im"])


def _profile(cfg, out, results):
    rows = []
    for p in cfg.models:
        prof = compute_znd_profile(p, _grid(cfg), allow_cj=cfg.numerics["allow_cj"])
        name = f"profile_alpha{_tag(p.alpha)}_zeta{_tag(p.zeta)}.csv"
        io.write_csv(out / name, prof.to_csv_rows())
        rows.append({"alpha": p.alpha, "zeta": p.zeta,
                     "max_abs_u0_minus_1": float(np.max(np.abs(prof.u0 - 1.0))),
                     "u0_at_xi_min": float(prof.u0[0]), "delta": prof.delta})
    results["profiles"] = rows


def _asymptotic(cfg, out, results):
    a = cfg.values["asymptotic"]
    xi = np.linspace(a["xi_min"], 0.0, a["n"])
    rows = [("q", "closure", "xi", "lambda", "u", "T")]
    dist = []
    for p in cfg.asymptotic:
        prof = {c: compute_asymptotic_profile(p, c, xi) for c in CLOSURES}
        for c in CLOSURES:
            pr = prof[c]
            rows.extend((p.q, c, x, lam, u, T) for x, lam, u, T in zip(pr.xi, pr.lam, pr.u, pr.T))
        dist.append({"q": p.q,
                     "uniform_vs_local": closure_distance(prof["uniform"], prof["local"]),
                     "nonuniform_vs_local": closure_distance(prof["nonuniform"], prof["local"])})
    io.write_csv(out / "asymptotic.csv", rows)
    results["closure_distances"] = dist


def _stability(cfg, out, results):
    rows = [("alpha", "zeta", "ell", "sigma_r", "sigma_i", "residual")]
    summary = []
    for p in cfg.models:
        prof = compute_znd_profile(p, _grid(cfg))
        for ell in cfg.numerics["ell"]:
            roots = find_roots(prof, ell, _box(cfg), ftol=cfg.numerics["root_ftol"])
            for r in roots:
                rows.append((p.alpha, p.zeta, ell, r.sigma.real, r.sigma.imag, r.residual))
            summary.append({"alpha": p.alpha, "zeta": p.zeta, "ell": ell, "n_roots": len(roots),
                            "max_sigma_r": max((r.sigma.real for r in roots), default=0.0)})
    io.write_csv(out / "roots.csv", rows)
    results["roots"] = summary


def _dispersion(cfg, out, results):
    n = cfg.numerics
    rows = [("alpha", "zeta", "ell", "sigma_r", "sigma_i", "residual")]
    curves = []
    for p in cfg.models:
        prof = compute_znd_profile(p, _grid(cfg))
        curve = dispersion_curve(prof, (n["ell_min"], n["ell_max"]), n["n_ell"], _box(cfg),
                                 ftol=n["root_ftol"])
        for ell, g, f, res in zip(curve.ell_values, curve.growth, curve.frequency, curve.residual):
            rows.append((p.alpha, p.zeta, ell, g, f, res))
        ell_star, g_star = curve.argmax()
        curves.append({"alpha": p.alpha, "zeta": p.zeta, "max_sigma_r": g_star,
                       "argmax_ell": ell_star})
    io.write_csv(out / "dispersion.csv", rows)
    results["curves"] = curves
    results["max_sigma_r"] = [c["max_sigma_r"] for c in curves]


def _simulate(cfg, out, results, workers):
    s, pt, o = cfg.simulation, cfg.perturbation, cfg.outputs
    if len(cfg.models) != 1:
        raise ConfigError("simulate takes a single (alpha, zeta) pair")
    params = cfg.models[0]
    prof = compute_znd_profile(params, _grid(cfg))
    domain = Domain(x_left=s["x_left"], x_right=s["x_right"], width=s["width"], dx=s["dx"],
                    dy=s["dy"], x_shock=s["x_shock"])
    pert = Perturbation(amplitude=pt["amplitude"], kind=pt["kind"], mode=pt["mode"],
                        width=pt["width"], seed=cfg.seed)
    opts = SolverOptions(cfl=s["cfl"], threshold_frac=s["threshold_frac"], window=s["window"],
                         workers=workers)
    try:
        state = init_from_znd(prof, domain, pert, opts)
    except ConfigurationError as exc:
        raise ConfigError(str(exc)) from None
    callbacks = []
    acc = None
    if o["trace"]:
        acc = TraceAccumulator.for_state(state, o["lab_x0"], o["lab_x1"])
        callbacks.append(TraceCallback(acc, o["trace_stride"]))
    x0 = np.nanmean(state.front.xs)
    snap_every = o["snapshot_every"] or None
    res = run(state, s["t_end"], callbacks, snapshot_every=snap_every)
    snapdir = out / "snapshots"
    if res.snapshots:
        snapdir.mkdir(exist_ok=True)
    for k, snap in enumerate(res.snapshots):
        io.write_snapshot(snapdir / f"snap_{k:05d}.bin", snap)
    io.write_snapshot(out / "final.bin", res.state)
    io.write_csv(out / "centerline.csv", io.centerline_rows(res.state))
    final = res.state
    results.update({
        "completed": res.completed, "error": res.error, "t_final": final.t,
        "steps": final.step_count, "initial_shock_position": float(x0),
        "final_shock_position": float(np.nanmean(final.front.xs)),
        "max_abs_v": float(np.max(np.abs(final.v.data))),
    })
    if acc is not None:
        (out / "trace.pgm").write_bytes(render_pgm(acc, o["gamma"]))
        if acc.data.max() > 0:
            m = cell_metrics(acc, o["n_windows"])
            io.write_csv(out / "cell_metrics.csv", m.to_csv_rows())
            results["cell_wavelength"] = [float(x) for x in m.wavelength]
            results["cell_regularity"] = [float(x) for x in m.regularity]
    if not res.completed:
        raise NumericsError(f"simulation stopped at t={final.t}: {res.error}")


def run_experiment(cfg: RunConfig, out_dir, *, threads: int | None = None) -> tuple[int, dict]:
    """Run the configured pipeline and write artifacts plus ``manifest.json``.

    Returns the exit status and the manifest.
    """
    out = Path(out_dir)
    manifest = {"experiment": cfg.experiment, "config": cfg.echo(), "seed": cfg.seed,
                "threads": threads, "versions": _versions(), "results": {}, "status": "ok"}
    t0 = time.perf_counter()
    status = EXIT_OK
    try:
        out.mkdir(parents=True, exist_ok=True)
        handlers = {"profile": _profile, "asymptotic-compare": _asymptotic,
                    "stability": _stability, "dispersion": _dispersion}
        if cfg.experiment == "simulate":
            _simulate(cfg, out, manifest["results"], threads)
        else:
            handlers[cfg.experiment](cfg, out, manifest["results"])
    except ConfigError as exc:
        status, manifest["status"] = EXIT_CONFIG, f"config error: {exc}"
    except (NumericsError, IntegrationError, ProfileError, StepError, DomainError,
            FloatingPointError) as exc:
        status, manifest["status"] = EXIT_NUMERICS, f"numerics error: {exc}"
    except OSError as exc:
        status, manifest["status"] = EXIT_IO, f"io error: {exc}"
    manifest["timings"] = {"total_seconds": time.perf_counter() - t0}
    if out.is_dir():
        files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
        manifest["artifacts"] = [{"path": str(p.relative_to(out)), "size": p.stat().st_size,
                                  "sha256": _sha256(p)} for p in files]
        try:
            (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
        except OSError as exc:
            manifest["status"] = f"io error: {exc}"
            status = EXIT_IO
    return status, manifest


def _threads(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get("DETANALOG_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"DETANALOG_THREADS must be an integer, got {env!r}") from None
        return value
    return None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="detanalog",
                                 description="Detonation analog model: profiles, stability, 2D runs.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--out", type=Path, default=None,
                    help="output directory (default: [outputs] directory)")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"detanalog: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = with_experiment(parse_config(text), args.experiment)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            values = cfg.echo()
            values["run"]["seed"] = args.seed
            cfg = RunConfig(**{**asdict_shallow(cfg), "seed": args.seed, "values": values})
        threads = _threads(args.threads)
        if threads is not None and threads < 1:
            raise ConfigError("thread count must be >= 1")
    except ConfigError as exc:
        print(f"detanalog: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else Path(cfg.outputs["directory"])
    status, manifest = run_experiment(cfg, out, threads=threads)
    if status != EXIT_OK:
        print(f"detanalog: {manifest['status']}", file=sys.stderr)
    return status


def asdict_shallow(cfg: RunConfig) -> dict:
    return {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}


if __name__ == "__main__":
    sys.exit(main())
