"""YAML run configuration: parsing, validation, and grid expansion.

A run config is one human-editable key/value tree. Scenario and target
fields accept scalars or lists; the CLI expands the cross product in
declaration order. Parse problems raise ConfigError with a dotted field
path (and the YAML line when the document itself is malformed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

from .core import (
    DomainError,
    NoiseProfile,
    ReliabilityTarget,
    ScenarioParams,
    dbm_to_watts,
    thermal_noise_watts,
)
from .schemes import AdaSenseConfig, BmacConfig, SchemeConfig, SinglePhaseConfig
from .solvers import SCHEME_ORDER

DEFAULT_BETA_SWEEP = {"start": 1e-10, "stop": 1e-2, "points": 25}


class ConfigError(Exception):
    """Malformed or invalid run configuration."""


@dataclass(frozen=True)
class OutputSettings:
    directory: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)
    symbol_duration_seconds: float = 1.0


@dataclass(frozen=True)
class AsymptoteSettings:
    """Inputs for the scaling-law checkers."""

    p_r: float = 1e-6
    beta: float = 1e-3
    alphas: tuple[float, ...] = tuple(10.0 ** -np.arange(4, 21, 2))
    sparsity_alpha: float = 1e-3
    sparsity_beta: float = 1e-6
    p1s: tuple[float, ...] = (1e-2, 1e-4, 1e-6, 1e-10)
    tolerances_path: Path | None = None


@dataclass(frozen=True)
class RunConfig:
    scenarios: tuple[ScenarioParams, ...]
    profile: NoiseProfile
    targets: tuple[ReliabilityTarget, ...]
    schemes: tuple[str, ...]
    mc_trials: int
    mc_seed: int
    output: OutputSettings
    scheme_config: SchemeConfig | None = None
    asymptote: AsymptoteSettings = field(default_factory=AsymptoteSettings)


def _as_mapping(node: Any, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _get(node: dict, key: str, path: str, required: bool = True) -> Any:
    if key not in node:
        if required:
            raise ConfigError(f"{path}: missing required field '{key}'")
        return None
    return node[key]


def _floats(value: Any, path: str) -> list[float]:
    items = value if isinstance(value, list) else [value]
    out = []
    for i, v in enumerate(items):
        if isinstance(v, str):
            # YAML 1.1 only floats exponents with a sign ("1.0e+6");
            # accept the unsigned spelling too.
            try:
                v = float(v)
            except ValueError:
                pass
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{path}[{i}]: expected a number, got {v!r}")
        out.append(float(v))
    if not out:
        raise ConfigError(f"{path}: list must be non-empty")
    return out


def _ints(value: Any, path: str) -> list[int]:
    out = []
    for v in _floats(value, path):
        if v != int(v):
            raise ConfigError(f"{path}: expected an integer, got {v}")
        out.append(int(v))
    return out


def _parse_profile(node: Any) -> NoiseProfile:
    node = _as_mapping(node, "profile")
    k = _floats(_get(node, "k", "profile"), "profile.k")[0]
    gamma = _floats(_get(node, "gamma", "profile"), "profile.gamma")[0]
    has_sigma = "sigma_t_sq" in node
    has_thermal = "temperature_kelvin" in node or "bandwidth_hz" in node
    if has_sigma == has_thermal:
        raise ConfigError(
            "profile: exactly one of sigma_t_sq or "
            "(temperature_kelvin, bandwidth_hz) must be given"
        )
    if has_sigma:
        sigma_t_sq = _floats(node["sigma_t_sq"], "profile.sigma_t_sq")[0]
    else:
        t = _floats(_get(node, "temperature_kelvin", "profile"), "profile.temperature_kelvin")[0]
        b = _floats(_get(node, "bandwidth_hz", "profile"), "profile.bandwidth_hz")[0]
        sigma_t_sq = thermal_noise_watts(t, b)
    try:
        return NoiseProfile(k=k, gamma=gamma, sigma_t_sq=sigma_t_sq)
    except DomainError as exc:
        raise ConfigError(f"profile: {exc}") from exc


def _parse_scenarios(node: Any) -> tuple[ScenarioParams, ...]:
    node = _as_mapping(node, "scenario")
    ns = _ints(_get(node, "n", "scenario"), "scenario.n")
    if ("p_dbm" in node) == ("p_watts" in node):
        raise ConfigError("scenario: exactly one of p_dbm or p_watts must be given")
    if "p_dbm" in node:
        powers = [dbm_to_watts(p) for p in _floats(node["p_dbm"], "scenario.p_dbm")]
    else:
        powers = _floats(node["p_watts"], "scenario.p_watts")
    p1s = _floats(_get(node, "p1", "scenario"), "scenario.p1")
    out = []
    for n in ns:
        for power in powers:
            for p1 in p1s:
                try:
                    out.append(
                        ScenarioParams(
                            received_power_watts=power, prior_p1=p1, preamble_len=n
                        )
                    )
                except DomainError as exc:
                    raise ConfigError(f"scenario: {exc}") from exc
    return tuple(out)


def _parse_targets(node: Any) -> tuple[ReliabilityTarget, ...]:
    node = _as_mapping(node, "targets")
    alphas = _floats(_get(node, "alpha", "targets"), "targets.alpha")
    if ("beta" in node) == ("beta_sweep" in node):
        raise ConfigError("targets: exactly one of beta or beta_sweep must be given")
    if "beta" in node:
        betas = _floats(node["beta"], "targets.beta")
    else:
        sweep = _as_mapping(node["beta_sweep"] or {}, "targets.beta_sweep")
        spec = dict(DEFAULT_BETA_SWEEP)
        unknown = set(sweep) - set(spec)
        if unknown:
            raise ConfigError(f"targets.beta_sweep: unknown keys {sorted(unknown)}")
        spec.update(sweep)
        points = _ints(spec["points"], "targets.beta_sweep.points")[0]
        if points < 1:
            raise ConfigError("targets.beta_sweep.points: must be >= 1")
        betas = list(
            np.logspace(
                np.log10(float(spec["start"])), np.log10(float(spec["stop"])), points
            )
        )
    out = []
    for alpha in alphas:
        for beta in betas:
            try:
                out.append(ReliabilityTarget(alpha=alpha, beta=beta))
            except DomainError as exc:
                raise ConfigError(f"targets: {exc}") from exc
    return tuple(out)


def _parse_schemes(value: Any) -> tuple[str, ...]:
    if value is None:
        return SCHEME_ORDER
    if not isinstance(value, list) or not value:
        raise ConfigError("schemes: expected a non-empty list of scheme names")
    for name in value:
        if name not in SCHEME_ORDER:
            raise ConfigError(
                f"schemes: unknown scheme '{name}' (expected one of {SCHEME_ORDER})"
            )
    return tuple(name for name in SCHEME_ORDER if name in value)


_SCHEME_FIELDS = {
    "single_phase": ("n", "receiver_power_watts", "threshold"),
    "bmac": ("n", "receiver_power_watts", "threshold"),
    "adasense": ("l1", "l2", "p_r1", "p_r2", "eta1", "eta2"),
}


def _parse_scheme_config(node: Any) -> SchemeConfig:
    node = _as_mapping(node, "scheme_config")
    scheme = _get(node, "scheme", "scheme_config")
    if scheme not in _SCHEME_FIELDS:
        raise ConfigError(
            f"scheme_config.scheme: unknown scheme '{scheme}' "
            f"(expected one of {SCHEME_ORDER})"
        )
    fields = _SCHEME_FIELDS[scheme]
    unknown = set(node) - set(fields) - {"scheme"}
    if unknown:
        raise ConfigError(f"scheme_config: unknown keys {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name in fields:
        value = _floats(_get(node, name, "scheme_config"), f"scheme_config.{name}")[0]
        kwargs[name] = int(value) if name in ("n", "l1", "l2") else value
    cls = {
        "single_phase": SinglePhaseConfig,
        "bmac": BmacConfig,
        "adasense": AdaSenseConfig,
    }[scheme]
    try:
        return cls(**kwargs)
    except DomainError as exc:
        raise ConfigError(f"scheme_config: {exc}") from exc


def _parse_output(node: Any) -> OutputSettings:
    if node is None:
        return OutputSettings()
    node = _as_mapping(node, "output")
    defaults = OutputSettings()
    directory = Path(node.get("directory", defaults.directory))
    formats = node.get("formats", list(defaults.formats))
    if not isinstance(formats, list) or not formats:
        raise ConfigError("output.formats: expected a non-empty list")
    bad = set(formats) - {"csv", "svg"}
    if bad:
        raise ConfigError(f"output.formats: unsupported formats {sorted(bad)}")
    duration = _floats(
        node.get("symbol_duration_seconds", defaults.symbol_duration_seconds),
        "output.symbol_duration_seconds",
    )[0]
    if duration <= 0.0:
        raise ConfigError("output.symbol_duration_seconds: must be positive")
    return OutputSettings(
        directory=directory,
        formats=tuple(f for f in ("csv", "svg") if f in formats),
        symbol_duration_seconds=duration,
    )


def _parse_asymptote(node: Any) -> AsymptoteSettings:
    if node is None:
        return AsymptoteSettings()
    node = _as_mapping(node, "asymptote")
    defaults = AsymptoteSettings()
    known = set(AsymptoteSettings.__dataclass_fields__)
    unknown = set(node) - known
    if unknown:
        raise ConfigError(f"asymptote: unknown keys {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    for name in ("p_r", "beta", "sparsity_alpha", "sparsity_beta"):
        if name in node:
            kwargs[name] = _floats(node[name], f"asymptote.{name}")[0]
    for name in ("alphas", "p1s"):
        if name in node:
            kwargs[name] = tuple(_floats(node[name], f"asymptote.{name}"))
    if "tolerances_path" in node:
        kwargs["tolerances_path"] = Path(node["tolerances_path"])
    return AsymptoteSettings(**kwargs) if kwargs else defaults


_TOP_LEVEL = {
    "scenario",
    "profile",
    "targets",
    "schemes",
    "mc",
    "output",
    "scheme_config",
    "asymptote",
}


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate one YAML run configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"config parse error{where}: {exc}") from exc
    doc = _as_mapping(doc, "config")
    unknown = set(doc) - _TOP_LEVEL
    if unknown:
        raise ConfigError(f"config: unknown top-level keys {sorted(unknown)}")
    for block in ("scenario", "profile", "targets"):
        if block not in doc:
            raise ConfigError(f"config: missing required block '{block}'")
    mc = _as_mapping(doc.get("mc") or {}, "mc")
    trials = _ints(mc.get("trials", 100_000), "mc.trials")[0]
    if trials < 1:
        raise ConfigError("mc.trials: must be >= 1")
    seed = _ints(mc.get("seed", 0), "mc.seed")[0]
    if not 0 <= seed < 2**64:
        raise ConfigError("mc.seed: must fit in an unsigned 64-bit integer")
    scheme_cfg = None
    if doc.get("scheme_config") is not None:
        scheme_cfg = _parse_scheme_config(doc["scheme_config"])
    return RunConfig(
        scenarios=_parse_scenarios(doc["scenario"]),
        profile=_parse_profile(doc["profile"]),
        targets=_parse_targets(doc["targets"]),
        schemes=_parse_schemes(doc.get("schemes")),
        mc_trials=trials,
        mc_seed=seed,
        output=_parse_output(doc.get("output")),
        scheme_config=scheme_cfg,
        asymptote=_parse_asymptote(doc.get("asymptote")),
    )


def scheme_name(cfg: SchemeConfig) -> str:
    if isinstance(cfg, SinglePhaseConfig):
        return "single_phase"
    if isinstance(cfg, BmacConfig):
        return "bmac"
    return "adasense"


def format_number(value: float | int | None) -> str:
    """CSV cell formatting: empty for absent, scientific with 10
    significant digits for floats, plain decimal for integers."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return "%.9e" % value


def grid_signature(values: Sequence[float]) -> str:
    """Compact deterministic tag for file names, e.g. 1e-03."""
    return "_".join("%g" % v for v in values)
