"""Strict ``key = value`` configuration with ``[section]`` headers.

Every key has a type and a default; unknown sections or keys, duplicates,
type mismatches and out-of-range values are errors that carry the line
number. Lists are comma separated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

from .model import AsymptoticParams, DomainError, ModelParams

EXPERIMENTS = ("profile", "asymptotic-compare", "stability", "dispersion", "simulate")
_REQUIRED = object()


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _int(text):
    return int(text, 10)


def _bool(text):
    t = text.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true or false")


def _floats(text):
    items = [s.strip() for s in text.split(",")]
    if not items or any(not s for s in items):
        raise ValueError("empty list element")
    return tuple(_float(s) for s in items)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _positive(v):
    return all(x > 0 for x in (v if isinstance(v, tuple) else (v,)))


def _nonneg(v):
    return all(x >= 0 for x in (v if isinstance(v, tuple) else (v,)))


# (parser, default, check, message)
_Key = tuple[Callable[[str], Any], Any, Callable[[Any], bool] | None, str]

SCHEMA: dict[str, dict[str, _Key]] = {
    "run": {
        "experiment": (_choice(*EXPERIMENTS), None, None, ""),
        "seed": (_int, 0, _nonneg, "must be >= 0"),
    },
    "model": {
        "alpha": (_floats, _REQUIRED, _positive, "must be > 0"),
        "beta": (_float, _REQUIRED, _positive, "must be > 0"),
        "zeta": (_floats, _REQUIRED, lambda v: all(x >= 1 for x in v), "must be >= 1"),
        "q": (_float, 2.0, _positive, "must be > 0"),
        "k": (_float, 1.0, _positive, "must be > 0"),
    },
    "asymptotic": {
        "q": (_floats, (5.0, 10.0, 100.0), _positive, "must be > 0"),
        "q_theta": (_float, 2.0, _nonneg, "must be >= 0"),
        "T_ignition": (_float, 0.0, None, ""),
        "k_rate": (_float, 1.0, _positive, "must be > 0"),
        "zeta": (_float, 1.0, lambda v: v >= 1, "must be >= 1"),
        "xi_min": (_float, -10.0, lambda v: v < 0, "must be < 0"),
        "n": (_int, 2001, lambda v: v >= 3, "must be >= 3"),
    },
    "numerics": {
        "grid_n": (_int, 2048, lambda v: v >= 3, "must be >= 3"),
        "grid_stretch": (_float, 2.0, _nonneg, "must be >= 0"),
        "allow_cj": (_bool, False, None, ""),
        "ell": (_floats, (0.6,), _nonneg, "must be >= 0"),
        "ell_min": (_float, 0.0, _nonneg, "must be >= 0"),
        "ell_max": (_float, 1.2, _nonneg, "must be >= 0"),
        "n_ell": (_int, 40, lambda v: v >= 2, "must be >= 2"),
        "box_re_min": (_float, 1e-3, _positive, "must be > 0"),
        "box_re_max": (_float, 2.0, _positive, "must be > 0"),
        "box_im_min": (_float, 0.0, None, ""),
        "box_im_max": (_float, 10.0, None, ""),
        "n_re": (_int, 40, lambda v: v >= 2, "must be >= 2"),
        "n_im": (_int, 80, lambda v: v >= 2, "must be >= 2"),
        "root_ftol": (_float, 1e-8, _positive, "must be > 0"),
    },
    "simulation": {
        "x_left": (_float, -25.0, None, ""),
        "x_right": (_float, 5.0, None, ""),
        "width": (_float, 20.0, _positive, "must be > 0"),
        "dx": (_float, 0.05, _positive, "must be > 0"),
        "dy": (_float, 0.05, _positive, "must be > 0"),
        "x_shock": (_float, 0.0, None, ""),
        "t_end": (_float, 200.0, _positive, "must be > 0"),
        "cfl": (_float, 0.8, lambda v: 0 < v <= 1, "must be in (0, 1]"),
        "threshold_frac": (_float, 0.5, lambda v: 0 < v < 1, "must be in (0, 1)"),
        "window": (_int, 4, lambda v: v >= 1, "must be >= 1"),
    },
    "perturbation": {
        "amplitude": (_float, 0.0, _nonneg, "must be >= 0"),
        "kind": (_choice("cosine", "noise"), "cosine", None, ""),
        "mode": (_int, 1, _nonneg, "must be >= 0"),
        "width": (_float, 2.0, _positive, "must be > 0"),
    },
    "outputs": {
        "directory": (str, "out", None, ""),
        "snapshot_every": (_float, 0.0, _nonneg, "must be >= 0"),
        "trace": (_bool, True, None, ""),
        "trace_stride": (_int, 1, lambda v: v >= 1, "must be >= 1"),
        "lab_x0": (_float, -25.0, None, ""),
        "lab_x1": (_float, 125.0, None, ""),
        "gamma": (_float, 1.0, _positive, "must be > 0"),
        "n_windows": (_int, 4, lambda v: v >= 1, "must be >= 1"),
    },
}

# sections whose required keys only apply to some experiments
_MODEL_EXPERIMENTS = ("profile", "stability", "dispersion", "simulate")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration. ``values`` holds every key, defaults included."""

    experiment: str | None
    models: tuple = ()
    asymptotic: tuple = ()
    numerics: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    perturbation: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    values: dict = field(default_factory=dict)

    @property
    def model(self):
        if self.models:
            return self.models[0]
        return self.asymptotic[0] if self.asymptotic else None

    def echo(self) -> dict:
        return {s: dict(kv) for s, kv in self.values.items()}


def _lex(text: str):
    """Yield ``(line_no, section, key, value)``; raises on malformed lines."""
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        for mark in (" #", " ;", "\t#", "\t;"):
            cut = line.find(mark)
            if cut >= 0:
                line = line[:cut].rstrip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", no)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", no)
            yield no, section, None, None
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", no)
        if section is None:
            raise ConfigError("key outside of any [section]", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", no)
        yield no, section, key, value


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    seen: dict[tuple[str, str], int] = {}
    raw: dict[str, dict[str, Any]] = {s: {} for s in SCHEMA}
    lines: dict[tuple[str, str], int] = {}
    for no, section, key, value in _lex(text):
        if key is None:
            continue
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", no)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} in [{section}] at lines "
                              f"{seen[(section, key)]} and {no}", no)
        seen[(section, key)] = no
        parser, _, check, msg = SCHEMA[section][key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{section}.{key}: cannot parse {value!r} ({exc})", no) from None
        if check is not None and not check(parsed):
            raise ConfigError(f"{section}.{key} = {value}: {msg}", no)
        raw[section][key] = parsed
        lines[(section, key)] = no

    experiment = raw["run"].get("experiment")
    values: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (_, default, _, _) in keys.items():
            if key in raw[section]:
                values[section][key] = raw[section][key]
            elif default is _REQUIRED:
                values[section][key] = None
            else:
                values[section][key] = default
    return _build(experiment, values, lines)


def with_experiment(config: RunConfig, experiment: str) -> RunConfig:
    """Bind the experiment named on the command line; it must agree with the file."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if config.experiment not in (None, experiment):
        raise ConfigError(f"config is for {config.experiment!r}, not {experiment!r}")
    values = config.echo()
    values["run"]["experiment"] = experiment
    return _build(experiment, values, {})


def _build(experiment, values, lines) -> RunConfig:
    models: tuple = ()
    asym: tuple = ()
    m = values["model"]
    if experiment in _MODEL_EXPERIMENTS:
        for key in ("alpha", "beta", "zeta"):
            if m[key] is None:
                raise ConfigError(f"missing required key {key!r} in [model]")
        try:
            models = tuple(ModelParams(a, m["beta"], z, m["q"], m["k"])
                           for z in m["zeta"] for a in m["alpha"])
        except DomainError as exc:
            raise ConfigError(str(exc), lines.get(("model", "zeta"))) from None
        if experiment in ("stability", "dispersion") and any(not p.overdriven for p in models):
            raise ConfigError("stability work requires zeta > 1", lines.get(("model", "zeta")))
    if experiment == "asymptotic-compare":
        a = values["asymptotic"]
        try:
            asym = tuple(AsymptoticParams(q=q, theta=a["q_theta"] / q, T_ignition=a["T_ignition"],
                                          k_rate=a["k_rate"], zeta=a["zeta"]) for q in a["q"])
        except DomainError as exc:
            raise ConfigError(str(exc), lines.get(("asymptotic", "q"))) from None
    n = values["numerics"]
    if n["ell_max"] < n["ell_min"]:
        raise ConfigError("ell_max must be >= ell_min", lines.get(("numerics", "ell_max")))
    if n["box_re_max"] <= n["box_re_min"] or n["box_im_max"] <= n["box_im_min"]:
        raise ConfigError("search box must have positive extent")
    s = values["simulation"]
    if not s["x_left"] < s["x_shock"] < s["x_right"]:
        raise ConfigError("need x_left < x_shock < x_right", lines.get(("simulation", "x_shock")))
    o = values["outputs"]
    if o["lab_x1"] <= o["lab_x0"]:
        raise ConfigError("lab_x1 must exceed lab_x0", lines.get(("outputs", "lab_x1")))
    return RunConfig(experiment=experiment, models=models, asymptotic=asym,
                     numerics=dict(n), simulation=dict(s), perturbation=dict(values["perturbation"]),
                     outputs=dict(o), seed=values["run"]["seed"], values=values)
