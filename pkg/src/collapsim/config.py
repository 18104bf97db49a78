"""TOML run configuration: schema, validation, canonical hash.

Configs are strict: unknown sections or keys are rejected by name, required
keys must be present, and every value is type- and range-checked before any
numerics run.  The fully resolved configuration (defaults filled in) is
hashed canonically; the hash is stamped into every output file so results
can be traced back to their exact inputs.

Sections:
  [background]  h_star, eps1, eta_ini, eta_end, rho_end
  [csl]         gamma, m0, r_c, preset, p_exponent, smoothing
  [run]         n_traj, base_seed, k, out_dir, points_per_decade, n_out,
                n_keep
  [cmb]         delta_eta, l_min, l_max, synthesize, synth_seed
  [scan]        rc_min, rc_max, rc_points, lambda_min, lambda_max,
                lambda_points, k_pivot, o1_prefactor, n_sigma, sigma_ns,
                window_decades, window_points

[scan] is optional as a whole; every other section may be omitted when the
command does not need it, with defaults applying where marked.  eps1 = 0 is
rejected here (stochastic and spectrum pipelines need z > 0); the library
accepts it for pure mode-function work.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version shim
    import tomli as tomllib

from .background import BackgroundModel
from .csl import PRESETS, CollapseSpec


class ConfigError(ValueError):
    """Invalid run configuration (maps to CLI exit code 2)."""


_REQUIRED = object()

# schema: section -> key -> (type tag, default, validator message or None)
_SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "background": {
        "h_star": ("float", _REQUIRED),
        "eps1": ("float", _REQUIRED),
        "eta_ini": ("float", _REQUIRED),
        "eta_end": ("float", _REQUIRED),
        "rho_end": ("float", 1.2e-11),
    },
    "csl": {
        "gamma": ("float", 0.0),
        "m0": ("float", 1.0),
        "r_c": ("float", 1.0),
        "preset": ("str", "amplitude"),
        "p_exponent": ("float", 0.0),
        "smoothing": ("bool", True),
    },
    "run": {
        "n_traj": ("int", 1000),
        "base_seed": ("int", 42),
        "k": ("float_list", ()),
        "out_dir": ("str", "out"),
        "points_per_decade": ("int", 512),
        "n_out": ("int", 257),
        "n_keep": ("int", 8),
    },
    "cmb": {
        "delta_eta": ("float", 1.0),
        "l_min": ("int", 2),
        "l_max": ("int", 50),
        "synthesize": ("int", 0),
        "synth_seed": ("int", 0),
    },
    "scan": {
        "rc_min": ("float", _REQUIRED),
        "rc_max": ("float", _REQUIRED),
        "rc_points": ("int", 32),
        "lambda_min": ("float", _REQUIRED),
        "lambda_max": ("float", _REQUIRED),
        "lambda_points": ("int", 32),
        "k_pivot": ("float", _REQUIRED),
        "o1_prefactor": ("float", 1.0),
        "n_sigma": ("float", 3.0),
        "sigma_ns": ("float", 0.0042),
        "window_decades": ("float", 2.0),
        "window_points": ("int", 8),
    },
}


@dataclass(frozen=True)
class CmbConfig:
    delta_eta: float
    l_min: int
    l_max: int
    synthesize: int
    synth_seed: int


@dataclass(frozen=True)
class ScanConfig:
    rc_min: float
    rc_max: float
    rc_points: int
    lambda_min: float
    lambda_max: float
    lambda_points: int
    k_pivot: float
    o1_prefactor: float
    n_sigma: float
    sigma_ns: float
    window_decades: float
    window_points: int


@dataclass(frozen=True)
class RunConfig:
    background: BackgroundModel
    rho_end: float
    csl: CollapseSpec
    n_traj: int
    base_seed: int
    k: tuple[float, ...]
    out_dir: str
    points_per_decade: int
    n_out: int
    n_keep: int
    cmb: CmbConfig
    scan: ScanConfig | None
    resolved: dict
    config_hash: str


def _coerce(section: str, key: str, tag: str, value: Any) -> Any:
    where = f"{section}.{key}"
    if tag == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where} must be a number, got {value!r}")
        return float(value)
    if tag == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return int(value)
    if tag == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be a boolean, got {value!r}")
        return bool(value)
    if tag == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if tag == "float_list":
        if not isinstance(value, (list, tuple)) or any(
                isinstance(v, bool) or not isinstance(v, (int, float))
                for v in value):
            raise ConfigError(f"{where} must be a list of numbers, "
                              f"got {value!r}")
        return tuple(float(v) for v in value)
    raise AssertionError(tag)


def _resolve_section(name: str, data: dict) -> dict:
    schema = _SCHEMA[name]
    unknown = sorted(set(data) - set(schema))
    if unknown:
        known = ", ".join(sorted(schema))
        raise ConfigError(f"unknown key '{name}.{unknown[0]}' "
                          f"(known keys: {known})")
    out = {}
    missing = []
    for key, (tag, default) in schema.items():
        if key in data:
            out[key] = _coerce(name, key, tag, data[key])
        elif default is _REQUIRED:
            missing.append(f"{name}.{key}")
        else:
            out[key] = default
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return out


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed TOML mapping and build the run configuration."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    unknown = sorted(set(data) - set(_SCHEMA))
    if unknown:
        raise ConfigError(f"unknown section [{unknown[0]}] "
                          f"(known sections: {', '.join(sorted(_SCHEMA))})")
    if "background" not in data:
        raise ConfigError("missing required section [background]")

    resolved: dict[str, dict] = {}
    for name in ("background", "csl", "run", "cmb"):
        resolved[name] = _resolve_section(name, data.get(name, {}))
    if "scan" in data:
        resolved["scan"] = _resolve_section("scan", data["scan"])

    bgc = resolved["background"]
    if bgc["eps1"] <= 0.0:
        raise ConfigError(
            "background.eps1 must be > 0 for configured runs (the curvature "
            "normalization z vanishes at eps1 = 0; exact de Sitter is a "
            "library-level test hook only)")
    try:
        bg = BackgroundModel(h_star=bgc["h_star"], eps1=bgc["eps1"],
                             eta_ini=bgc["eta_ini"], eta_end=bgc["eta_end"])
    except ValueError as exc:
        raise ConfigError(f"background: {exc}") from exc
    if bgc["rho_end"] < 0.0:
        raise ConfigError("background.rho_end must be >= 0")

    cc = resolved["csl"]
    try:
        csl_spec = CollapseSpec(gamma=cc["gamma"], m0=cc["m0"], r_c=cc["r_c"],
                                preset=cc["preset"],
                                p_exponent=cc["p_exponent"],
                                include_smoothing=cc["smoothing"])
    except ValueError as exc:
        raise ConfigError(f"csl: {exc}") from exc
    if cc["preset"] not in PRESETS:  # unreachable; CollapseSpec validates
        raise ConfigError(f"csl.preset must be one of {PRESETS}")

    rc = resolved["run"]
    if rc["n_traj"] < 2:
        raise ConfigError("run.n_traj must be >= 2")
    if rc["points_per_decade"] < 1:
        raise ConfigError("run.points_per_decade must be >= 1")
    if rc["n_out"] < 2:
        raise ConfigError("run.n_out must be >= 2")
    if rc["n_keep"] < 0:
        raise ConfigError("run.n_keep must be >= 0")
    if any(k <= 0.0 for k in rc["k"]):
        raise ConfigError("run.k entries must be > 0")

    mc = resolved["cmb"]
    if mc["delta_eta"] <= 0.0:
        raise ConfigError("cmb.delta_eta must be > 0")
    if mc["l_min"] < 2:
        raise ConfigError("cmb.l_min must be >= 2")
    if mc["l_max"] < mc["l_min"]:
        raise ConfigError("cmb.l_max must be >= cmb.l_min")
    if mc["synthesize"] < 0:
        raise ConfigError("cmb.synthesize must be >= 0")
    cmb_cfg = CmbConfig(delta_eta=mc["delta_eta"], l_min=mc["l_min"],
                        l_max=mc["l_max"], synthesize=mc["synthesize"],
                        synth_seed=mc["synth_seed"])

    scan_cfg = None
    if "scan" in resolved:
        sc = resolved["scan"]
        if not (0.0 < sc["rc_min"] <= sc["rc_max"]):
            raise ConfigError("scan needs 0 < rc_min <= rc_max")
        if not (0.0 <= sc["lambda_min"] <= sc["lambda_max"]):
            raise ConfigError("scan needs 0 <= lambda_min <= lambda_max")
        if sc["rc_points"] < 1 or sc["lambda_points"] < 1:
            raise ConfigError("scan grid sizes must be >= 1")
        if sc["k_pivot"] <= 0.0:
            raise ConfigError("scan.k_pivot must be > 0")
        if sc["window_points"] < 2:
            raise ConfigError("scan.window_points must be >= 2")
        scan_cfg = ScanConfig(**sc)

    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(canon.encode()).hexdigest()

    return RunConfig(
        background=bg, rho_end=bgc["rho_end"], csl=csl_spec,
        n_traj=rc["n_traj"], base_seed=rc["base_seed"], k=rc["k"],
        out_dir=rc["out_dir"], points_per_decade=rc["points_per_decade"],
        n_out=rc["n_out"], n_keep=rc["n_keep"], cmb=cmb_cfg, scan=scan_cfg,
        resolved=resolved, config_hash=digest)


def load_config(path: str) -> RunConfig:
    """Read and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")
    return parse_config(data)
