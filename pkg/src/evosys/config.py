"""Run configuration: one TOML (or JSON) file per run, strict keys.

Unknown sections or keys are errors, not warnings; every run is meant to be
reproducible from its config alone.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from evosys.coefficients import CoefficientModel
from evosys.discretization import DiscreteDomain
from evosys.errors import ConfigError
from evosys.models import (
    coupled_ou_model,
    ou_model,
    polynomial_spec,
    ramp_coupling_model,
)
from evosys.coefficients import build_polynomial_model

_SECTIONS = {
    "model": {
        "kind", "d", "m", "interval", "omega", "h", "gamma", "ell", "dmat", "sigma",
        "q", "gamma0", "coupling", "require",
    },
    "grid": {"d", "L", "N", "bc", "upwind"},
    "evolve": {"s", "t_end", "dt", "scheme", "record", "f"},
    "exhaustion": {"ladder", "inner_L", "tol", "f", "s", "t_end", "dt", "scheme"},
    "kernels": {"t", "r"},
    "measures": {"x0", "j", "n", "horizon", "tau_step", "tv_tol", "s_times", "dt", "scheme"},
    "verify": {"checks", "window", "record", "dt", "scheme", "f"},
}


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    raw = path.read_bytes()
    if path.suffix == ".json":
        cfg = json.loads(raw.decode())
    else:
        try:
            cfg = tomllib.loads(raw.decode())
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"cannot parse {path}: {err}") from err
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a table")
    unknown = set(cfg) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for section, keys in cfg.items():
        if not isinstance(keys, dict):
            raise ConfigError(f"section [{section}] must be a table")
        bad = set(keys) - _SECTIONS[section]
        if bad:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(bad)}")


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


def build_model(cfg: dict) -> CoefficientModel:
    mc = cfg.get("model")
    if not mc:
        raise ConfigError("missing or empty [model] section")
    kind = mc.get("kind")
    if kind is None:
        raise ConfigError("[model] needs a 'kind'")
    interval = tuple(mc.get("interval", (0.0, 1.0)))
    if kind == "polynomial":
        needed = {"d", "m", "omega", "h", "gamma", "ell", "dmat", "sigma"}
        missing = needed - set(mc)
        if missing:
            raise ConfigError(f"[model] kind=polynomial missing keys: {sorted(missing)}")
        try:
            spec = polynomial_spec(
                d=int(mc["d"]),
                m=int(mc["m"]),
                omega=mc["omega"],
                h_exp=mc["h"],
                gamma=mc["gamma"],
                ell_exp=mc["ell"],
                dmat=mc["dmat"],
                sigma_exp=mc["sigma"],
                interval=interval,
            )
        except (ValueError, IndexError, TypeError) as err:
            raise ConfigError(f"bad polynomial model: {err}") from err
        return build_polynomial_model(spec)
    if kind == "ou":
        return ou_model(
            q=mc.get("q", 1.0),
            gamma=mc.get("gamma0", 1.0),
            d=int(mc.get("d", 1)),
            m=int(mc.get("m", 1)),
            coupling=mc.get("coupling"),
            interval=interval,
        )
    if kind == "coupled_ou":
        return coupled_ou_model(
            q=mc.get("q", 0.5),
            gamma=mc.get("gamma0", 1.0),
            coupling=mc.get("coupling", ((-1.0, 1.0), (1.0, -1.0))),
            d=int(mc.get("d", 1)),
            interval=interval,
        )
    if kind in ("ramp_coupling", "ramp_coupling_bad"):
        return ramp_coupling_model(variant=1 if kind == "ramp_coupling" else 2, d=int(mc.get("d", 1)), interval=interval)
    raise ConfigError(f"unknown model kind {kind!r}")


def build_domain(cfg: dict) -> DiscreteDomain:
    gc = cfg.get("grid")
    if not gc:
        raise ConfigError("missing [grid] section")
    try:
        return DiscreteDomain(
            d=int(gc.get("d", 1)),
            L=float(gc["L"]),
            N=int(gc["N"]),
            bc=gc.get("bc", "dirichlet"),
        )
    except (KeyError, ValueError) as err:
        raise ConfigError(f"bad [grid] section: {err}") from err


def named_initial_data(name: str, m: int):
    """Small catalog of initial data, selected by name in configs."""

    def bump(x):
        return math.exp(-2.0 * float(np.dot(x, x)))

    catalog = {
        "ones": lambda x: np.ones(m),
        "bump": lambda x: np.full(m, bump(x)),
        "neg_bump": lambda x: np.full(m, -bump(x)),
        "bump_first": lambda x: np.array([bump(x)] + [0.0] * (m - 1)),
        "phi": lambda x: np.full(m, 1.0 + float(np.dot(x, x))),
        "sin": lambda x: np.array([math.sin(x[0] + 0.3 * k) for k in range(m)]),
    }
    if name not in catalog:
        raise ConfigError(f"unknown initial data {name!r}; choose from {sorted(catalog)}")
    return catalog[name]
