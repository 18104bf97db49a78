"""Command line driver.

Subcommands mirror the pipeline stages:

    collapsim background --config run.toml
    collapsim modes      --config run.toml [--k ...] [--eta-end ...]
    collapsim csl run    --config run.toml [--n-traj ...] [--base-seed ...]
    collapsim spectrum   --config run.toml [--from DIR] [--analytic]
    collapsim cls        --config run.toml [--input FILE | --analytic]
    collapsim scan       --config run.toml [--rc-min ...] [--lambda-max ...]

Every invocation echoes the resolved configuration to
<out_dir>/effective_config.json and stamps each CSV with '#' metadata
lines (tool version, exact command, config hash, seeds).  Exit codes:
0 on success, 2 for configuration problems, 3 for runtime failures such
as missing upstream outputs; errors are written to stderr as one JSON
record.
"""

from __future__ import annotations

import argparse
import copy
import glob
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from collapsim import __version__, runio
from collapsim import cmb as cmb_mod
from collapsim import constraints
from collapsim import spectrum as spectrum_mod
from collapsim.config import ConfigError, RunConfig, load_config, parse_config
from collapsim.csl import collapse_diagnostics, evolve_ensemble, lindblad_moments
from collapsim.modes import (
    eta_log_grid,
    evolve_bogoliubov,
    evolve_omega,
    spectrum_heisenberg,
    squeezing_of,
)

CONVENTION = "r_c crossing at a(eta_c) = k * r_c (no 2 pi factor)"
OUTPUT_PPD = 64          # per-decade density of CSV time grids
REGIME_CODES = {"inflation_crossing": 0, "radiation_crossing": 1}


def _base_meta(cfg: RunConfig, command: str) -> dict:
    return {
        "tool": f"collapsim {__version__}",
        "command": command,
        "config_hash": cfg.config_hash,
        "convention": CONVENTION,
    }


def _write_effective_config(cfg: RunConfig, out_dir: str, command: str) -> None:
    runio.write_json(os.path.join(out_dir, "effective_config.json"), {
        "tool": f"collapsim {__version__}",
        "command": command,
        "config_hash": cfg.config_hash,
        "resolved": cfg.resolved,
    })


def _override(cfg: RunConfig, updates: dict[str, dict]) -> RunConfig:
    """Re-resolve the config with flag overrides folded in."""
    raw = copy.deepcopy(cfg.resolved)
    for section, kv in updates.items():
        raw.setdefault(section, {}).update(kv)
    return parse_config(raw)


def _mode_list(cfg: RunConfig) -> list[float]:
    if not cfg.k:
        raise ConfigError("no modes selected: set run.k in the config "
                          "or pass --k")
    return list(cfg.k)


def _n_threads() -> int:
    raw = os.environ.get("COLLAPSIM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"COLLAPSIM_THREADS must be an integer, got {raw!r}")
    return max(1, n)


def _map_modes(fn, items):
    n = _n_threads()
    if n == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def cmd_background(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    bg = cfg.background
    eta = eta_log_grid(bg.eta_ini, bg.eta_end, args.points_per_decade)
    s = bg.eval(eta)
    meta = _base_meta(cfg, command)
    runio.write_csv(os.path.join(out_dir, "background.csv"), {
        "eta": s.eta, "a": s.a, "z": s.z,
        "zp_z": s.zp_z, "zpp_z": s.zpp_z, "ah": s.ah,
    }, meta)


def cmd_modes(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    bg = cfg.background
    ks = _mode_list(cfg)
    for i, k in enumerate(ks):
        eta = eta_log_grid(bg.eta_ini, bg.eta_end, args.points_per_decade)
        bog = evolve_bogoliubov(bg, k, eta)
        om = evolve_omega(bg, k, eta)
        sq = squeezing_of(bog.u, bog.v)
        p_zeta = spectrum_heisenberg(bog, bg)
        meta = _base_meta(cfg, command)
        meta["k"] = runio.format_value(k)
        meta["mode_index"] = str(i)
        runio.write_csv(os.path.join(out_dir, f"modes_k{i}.csv"), {
            "eta": eta,
            "re_u": bog.u.real, "im_u": bog.u.imag,
            "re_v": bog.v.real, "im_v": bog.v.imag,
            "r": sq.r, "phi": sq.phi, "theta": sq.theta,
            "re_omega": om.omega.real, "im_omega": om.omega.imag,
            "p_zeta": p_zeta,
        }, meta)


def cmd_csl_run(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    bg = cfg.background
    spec = cfg.csl
    ks = _mode_list(cfg)

    def one(item):
        i, k = item
        ens = evolve_ensemble(bg, k, spec, cfg.n_traj,
                              points_per_decade=cfg.points_per_decade,
                              n_out=cfg.n_out, base_seed=cfg.base_seed,
                              mode_index=i, n_keep=cfg.n_keep)
        mom = lindblad_moments(bg, k, spec, ens.eta)
        diag = collapse_diagnostics(bg, k, spec,
                                    points_per_decade=cfg.points_per_decade)
        return ens, mom, diag

    results = _map_modes(one, list(enumerate(ks)))
    for i, (ens, mom, diag) in enumerate(results):
        meta = _base_meta(cfg, command)
        meta.update({
            "k": runio.format_value(ens.k), "mode_index": str(i),
            "base_seed": str(ens.base_seed), "n_traj": str(ens.n_traj),
        })
        columns = {
            "eta": ens.eta,
            "re_omega": ens.omega.real, "im_omega": ens.omega.imag,
            "zbar_mean": ens.zbar_mean, "zbar2_mean": ens.zbar2_mean,
            "xbar2_mean": ens.xbar2_mean,
        }
        for j in range(ens.samples.shape[0]):
            columns[f"zbar_sample_{j}"] = ens.samples[j]
        runio.write_csv(os.path.join(out_dir, f"csl_k{i}.csv"), columns, meta)

        # Law of total variance closes the loop against the moment oracle.
        m_xx_ens = float(ens.xbar2_mean[-1]
                         + 1.0 / (4.0 * float(ens.omega[-1].real)))
        m_xx_oracle = float(mom.m_xx[-1])
        sectors, counts = np.unique(ens.sectors, return_counts=True)
        runio.write_json(os.path.join(out_dir, f"csl_k{i}_summary.json"), {
            "k": ens.k, "mode_index": i,
            "n_traj": ens.n_traj, "base_seed": ens.base_seed,
            "points_per_decade": ens.points_per_decade,
            "max_k_deta": ens.max_k_deta,
            "sector_counts": dict(zip(sectors.tolist(),
                                      counts.astype(int).tolist())),
            "zbar_final": ens.zbar_final.tolist(),
            "diagnostics": {
                "width_end": diag.width_end,
                "width_end_std": diag.width_end_std,
                "width_ratio": diag.width_ratio,
                "collapsed": diag.collapsed,
                "threshold": diag.threshold,
            },
            "moments_end": {
                "m_xx": m_xx_oracle, "m_xp": float(mom.m_xp[-1]),
                "m_pp": float(mom.m_pp[-1]),
                "ensemble_m_xx": m_xx_ens,
                "rel_err": m_xx_ens / m_xx_oracle - 1.0,
            },
            "config_hash": cfg.config_hash,
        })


def cmd_spectrum(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    if args.analytic:
        _spectrum_analytic(cfg, args, out_dir, command)
        return
    src = args.from_dir or out_dir
    paths = sorted(glob.glob(os.path.join(src, "csl_k*_summary.json")))
    if not paths:
        raise FileNotFoundError(
            f"no csl_k*_summary.json under {src}; run `collapsim csl run` "
            "first or pass --from")
    rows = []
    for path in paths:
        rec = runio.read_json(path)
        p, err = spectrum_mod.estimate_point(
            rec["k"], np.asarray(rec["zbar_final"], dtype=float))
        rows.append((rec["k"], p, err, rec["n_traj"]))
    rows.sort()
    k, p, err, n = (np.asarray(col) for col in zip(*rows))
    meta = _base_meta(cfg, command)
    meta["source"] = src
    runio.write_csv(os.path.join(out_dir, "spectrum.csv"), {
        "k": k, "p_zeta": p, "p_err": err, "n_traj": n.astype(int),
    }, meta)


def _analytic_regime(cfg: RunConfig, name: str, k_pivot: float) -> str:
    if name != "auto":
        return name
    return constraints.select_regime(cfg.background, k_pivot, cfg.csl.r_c)


def _analytic_pivot(cfg: RunConfig, ks) -> float:
    if cfg.scan is not None:
        return cfg.scan.k_pivot
    ks = np.asarray(ks, dtype=float)
    return float(np.exp(np.mean(np.log(ks))))


def _spectrum_analytic(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    ks = np.asarray(_mode_list(cfg), dtype=float)
    k_pivot = _analytic_pivot(cfg, ks)
    regime = _analytic_regime(cfg, args.regime, k_pivot)
    o1 = args.o1 if args.o1 is not None else (
        cfg.scan.o1_prefactor if cfg.scan is not None else 1.0)
    table = spectrum_mod.analytic_csl_spectrum(
        cfg.background, cfg.csl, ks, cfg.rho_end,
        o1_prefactor=o1, regime=regime)
    meta = _base_meta(cfg, command)
    meta.update({
        "regime": regime, "o1_prefactor": runio.format_value(o1),
        "gamma": runio.format_value(cfg.csl.gamma),
        "m0": runio.format_value(cfg.csl.m0),
        "r_c": runio.format_value(cfg.csl.r_c),
        "rho_end": runio.format_value(cfg.rho_end),
    })
    runio.write_csv(os.path.join(out_dir, "spectrum_analytic.csv"), {
        "k": table.k, "p_std": table.p_std, "p_csl": table.p_csl,
        "correction": table.correction,
    }, meta)


def _spectrum_table_for_cls(cfg: RunConfig, args, out_dir: str):
    if args.analytic:
        ks = np.asarray(_mode_list(cfg), dtype=float)
        k_pivot = _analytic_pivot(cfg, ks)
        regime = _analytic_regime(cfg, "auto", k_pivot)
        table = spectrum_mod.analytic_csl_spectrum(
            cfg.background, cfg.csl, ks, cfg.rho_end, regime=regime)
        return (table.k, table.p_csl), "analytic"
    path = args.input or os.path.join(out_dir, "spectrum.csv")
    if not os.path.exists(path):
        raise FileNotFoundError(
            f"spectrum table not found: {path}; run `collapsim spectrum` "
            "first, pass --input, or use --analytic")
    _, cols = runio.read_csv(path)
    for name in ("p_zeta", "p_csl"):
        if name in cols:
            return (cols["k"], cols[name]), f"{path}:{name}"
    raise ValueError(f"{path} has no p_zeta or p_csl column")


def cmd_cls(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    table, source = _spectrum_table_for_cls(cfg, args, out_dir)
    l_list = np.arange(cfg.cmb.l_min, cfg.cmb.l_max + 1)
    cls = cmb_mod.compute_cls(table, l_list, delta_eta=cfg.cmb.delta_eta)
    var = cmb_mod.cosmic_variance(l_list, cls)
    meta = _base_meta(cfg, command)
    meta["source"] = source
    meta["delta_eta"] = runio.format_value(cfg.cmb.delta_eta)
    runio.write_csv(os.path.join(out_dir, "cls.csv"), {
        "l": l_list.astype(int), "c_l": cls, "cosmic_variance": var,
    }, meta)

    n_real = args.synthesize if args.synthesize is not None \
        else cfg.cmb.synthesize
    if n_real > 0:
        seed = args.seed if args.seed is not None else cfg.cmb.synth_seed
        alm = cmb_mod.synthesize_alm(cls, l_list, seed=seed, n_real=n_real)
        hat = cmb_mod.estimate_cls(alm, l_list)
        meta = _base_meta(cfg, command)
        meta.update({"n_real": str(n_real), "seed": str(seed)})
        runio.write_csv(os.path.join(out_dir, "cls_synth.csv"), {
            "l": l_list.astype(int), "c_l": cls,
            "c_l_hat_mean": hat.mean(axis=0),
            "c_l_hat_var": hat.var(axis=0, ddof=1),
        }, meta)


def cmd_scan(cfg: RunConfig, args, out_dir: str, command: str) -> None:
    if cfg.scan is None:
        raise ConfigError("the scan command needs a [scan] section "
                          "(rc_min/rc_max/lambda_min/lambda_max/k_pivot)")
    sc = cfg.scan
    if sc.lambda_min <= 0.0:
        raise ConfigError("scan.lambda_min must be > 0 for the log grid "
                          "(lambda = 0 is the collapse-free limit)")
    rc_grid = np.logspace(np.log10(sc.rc_min), np.log10(sc.rc_max),
                          sc.rc_points)
    lam_grid = np.logspace(np.log10(sc.lambda_min), np.log10(sc.lambda_max),
                           sc.lambda_points)
    result = constraints.exclusion_scan(
        cfg.background, cfg.csl.m0, cfg.rho_end, sc.k_pivot,
        rc_grid, lam_grid, o1_prefactor=sc.o1_prefactor,
        n_sigma=sc.n_sigma, sigma_ns=sc.sigma_ns,
        window_decades=sc.window_decades, window_points=sc.window_points)

    nr, nl = rc_grid.size, lam_grid.size
    rc_col = np.repeat(result.r_c, nl)
    lam_col = np.tile(result.lam, nr)
    gamma_col = np.array([constraints.gamma_from_lambda(lam, rc)
                          for rc, lam in zip(rc_col, lam_col)])
    regime_col = np.repeat(
        np.array([REGIME_CODES[r] for r in result.regime]), nl)
    meta = _base_meta(cfg, command)
    meta["regime_codes"] = "; ".join(
        f"{code}={name}" for name, code in sorted(REGIME_CODES.items(),
                                                  key=lambda kv: kv[1]))
    meta["k_pivot"] = runio.format_value(sc.k_pivot)
    meta["threshold"] = runio.format_value(result.threshold)
    runio.write_csv(os.path.join(out_dir, "exclusion.csv"), {
        "r_c": rc_col, "lambda": lam_col, "gamma": gamma_col,
        "delta_ns": result.delta_ns.reshape(-1),
        "regime": regime_col,
        "excluded": result.excluded.reshape(-1).astype(int),
    }, meta)

    bg = cfg.background
    rc_star = float(np.asarray(bg.scale_factor(bg.eta_end))) / sc.k_pivot
    runio.write_json(os.path.join(out_dir, "exclusion_summary.json"), {
        "k_pivot": sc.k_pivot,
        "rc_star": rc_star,
        "threshold": result.threshold,
        "n_sigma": sc.n_sigma, "sigma_ns": sc.sigma_ns,
        "o1_prefactor": sc.o1_prefactor,
        "n_excluded": int(result.excluded.sum()),
        "n_cells": int(result.excluded.size),
        "rc_grid": rc_grid.tolist(),
        "lambda_grid": lam_grid.tolist(),
        "regimes": result.regime.tolist(),
        "config_hash": cfg.config_hash,
    })


def _apply_flag_overrides(cfg: RunConfig, args) -> RunConfig:
    updates: dict[str, dict] = {}

    def put(section, key, value):
        if value is not None:
            updates.setdefault(section, {})[key] = value

    put("run", "k", getattr(args, "k", None))
    put("background", "eta_end", getattr(args, "eta_end", None))
    put("run", "n_traj", getattr(args, "n_traj", None))
    put("run", "base_seed", getattr(args, "base_seed", None))
    for name in ("rc_min", "rc_max", "rc_points", "lambda_min", "lambda_max",
                 "lambda_points", "k_pivot"):
        put("scan", name, getattr(args, name, None))
    if "scan" in updates and cfg.scan is None:
        raise ConfigError("scan flag overrides need a [scan] section "
                          "in the config")
    if not updates:
        return cfg
    return _override(cfg, updates)


def _k_csv(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad k list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty k list")
    return values


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="TOML run configuration")
    common.add_argument("--out-dir", default=None,
                        help="output directory (default: run.out_dir)")

    parser = argparse.ArgumentParser(
        prog="collapsim",
        description="inflationary perturbations under collapse dynamics")
    parser.add_argument("--version", action="version",
                        version=f"collapsim {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("background", parents=[common],
                       help="tabulate the background functions")
    p.add_argument("--points-per-decade", type=int, default=OUTPUT_PPD)

    p = sub.add_parser("modes", parents=[common],
                       help="evolve mode functions and Gaussian widths")
    p.add_argument("--k", type=_k_csv, default=None,
                   help="comma-separated comoving wavenumbers")
    p.add_argument("--eta-end", type=float, default=None)
    p.add_argument("--points-per-decade", type=int, default=OUTPUT_PPD)

    p = sub.add_parser("csl", help="collapse-model ensembles")
    csl_sub = p.add_subparsers(dest="subcmd", required=True)
    p = csl_sub.add_parser("run", parents=[common],
                           help="evolve stochastic ensembles per mode")
    p.add_argument("--k", type=_k_csv, default=None)
    p.add_argument("--n-traj", type=int, default=None)
    p.add_argument("--base-seed", type=int, default=None)

    p = sub.add_parser("spectrum", parents=[common],
                       help="assemble the curvature power spectrum")
    p.add_argument("--from", dest="from_dir", default=None,
                   help="directory holding csl_k*_summary.json")
    p.add_argument("--analytic", action="store_true",
                   help="write the analytic collapse-corrected spectrum")
    p.add_argument("--regime", default="auto",
                   choices=["auto"] + sorted(REGIME_CODES),
                   help="crossing regime for --analytic")
    p.add_argument("--o1", type=float, default=None,
                   help="order-one prefactor for --analytic")

    p = sub.add_parser("cls", parents=[common],
                       help="Sachs-Wolfe multipoles from a spectrum")
    p.add_argument("--input", default=None,
                   help="spectrum CSV (default: <out_dir>/spectrum.csv)")
    p.add_argument("--analytic", action="store_true",
                   help="use the analytic spectrum instead of a table")
    p.add_argument("--synthesize", type=int, default=None,
                   help="number of alm realizations to draw")
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("scan", parents=[common],
                       help="exclusion map over the (r_c, lambda) plane")
    p.add_argument("--rc-min", type=float, default=None)
    p.add_argument("--rc-max", type=float, default=None)
    p.add_argument("--rc-points", type=int, default=None)
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--lambda-points", type=int, default=None)
    p.add_argument("--k-pivot", type=float, default=None)
    return parser


_HANDLERS = {
    "background": cmd_background,
    "modes": cmd_modes,
    "csl": cmd_csl_run,
    "spectrum": cmd_spectrum,
    "cls": cmd_cls,
    "scan": cmd_scan,
}


def _fail(code: int, message: str) -> int:
    import json

    sys.stderr.write(json.dumps({"error": message, "code": code}) + "\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    command = "collapsim " + " ".join(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_flag_overrides(cfg, args)
        out_dir = runio.ensure_dir(args.out_dir or cfg.out_dir)
        _write_effective_config(cfg, out_dir, command)
        _HANDLERS[args.cmd](cfg, args, out_dir, command)
    except ConfigError as exc:
        return _fail(2, str(exc))
    except (ValueError, RuntimeError, OSError) as exc:
        return _fail(3, f"{type(exc).__name__}: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
