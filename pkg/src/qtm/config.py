"""Experiment configuration: flat ``key = value`` files read with configparser.

Every key below may appear in a config file or be overridden on the command
line with ``--set key=value``. Floats accept ``inf``; lists are comma separated;
optional values accept ``none``. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import configparser
import dataclasses
import typing
from dataclasses import dataclass, field

from qtm.machines import INFINITE, GeneralMachineConfig, MachineConfig

EXPERIMENTS = ("evolve", "sweep", "wstate", "darkcheck", "limits")

# keys that only steer execution and never change the numbers written
EXECUTION_KEYS = ("out", "threads")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "evolve"
    # three-qubit machine, units of epsilon
    g13: float = 0.05
    g23: float = 0.05
    U: float = INFINITE
    mu: float = INFINITE
    mu3: float = 0.0
    T1: float = 1.0
    T3: float = 1.0
    gamma1: float | None = None
    gamma3: float | None = None
    # evolve
    t_max: float | None = None
    t_points: int = 500
    t_scale: str = "log"
    initial: str = "000"
    epsilon_ghz: float | None = None
    # sweep
    mu_min: float = 0.0
    mu_max: float = 20.0
    mu_points: int = 61
    mu_scale: str = "linear"
    U_min: float = 0.0
    U_max: float = 30.0
    U_points: int = 61
    U_scale: str = "linear"
    # limits
    mu0: float = 2.0
    U0: float = 4.0
    scales: list[float] = field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
    # general machine (wstate, darkcheck)
    machine: str = "three_qubit"
    n_values: list[int] = field(default_factory=lambda: [2, 3, 4, 5])
    T: float = 1.0
    coupling_mode: str = "equal"
    g: float = 0.05
    g_min: float = 0.05
    g_max: float = 1.0
    g_first: list[float] = field(default_factory=list)
    g_partner: list[float] = field(default_factory=list)
    draws: int = 10
    target: str = "closed_form"
    # execution
    seed: int = 0
    threads: int = 0
    out: str | None = None

    def validate(self) -> ExperimentConfig:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for axis in ("mu", "U"):
            if getattr(self, f"{axis}_points") < 2:
                raise ConfigError(f"{axis}_points must be >= 2")
            if getattr(self, f"{axis}_scale") not in ("linear", "log"):
                raise ConfigError(f"{axis}_scale must be linear or log")
        if self.t_scale not in ("linear", "log"):
            raise ConfigError("t_scale must be linear or log")
        if self.t_points < 1:
            raise ConfigError("t_points must be >= 1")
        if self.t_max is not None and not self.t_max >= 0:
            raise ConfigError("t_max must be >= 0")
        if self.machine not in ("three_qubit", "general"):
            raise ConfigError("machine must be three_qubit or general")
        if self.coupling_mode not in ("equal", "random", "explicit"):
            raise ConfigError("coupling_mode must be equal, random or explicit")
        if self.target not in ("closed_form", "singlet", "w"):
            raise ConfigError("target must be closed_form, singlet or w")
        if any(not 2 <= n <= 6 for n in self.n_values) or not self.n_values:
            raise ConfigError("n_values must be in [2, 6]")
        if len(self.initial) != 3 or set(self.initial) - {"0", "1"}:
            raise ConfigError("initial must be a 3-bit string such as 000")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0 (0 = auto)")
        try:
            self.machine_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def machine_config(self, default_gamma: float = 0.1, **overrides) -> MachineConfig:
        params = dict(
            g13=self.g13,
            g23=self.g23,
            U=self.U,
            mu1=self.mu,
            mu3=self.mu3,
            T1=self.T1,
            T3=self.T3,
            gamma1=default_gamma if self.gamma1 is None else self.gamma1,
            gamma3=default_gamma if self.gamma3 is None else self.gamma3,
        )
        params.update(overrides)
        return MachineConfig(**params)

    def general_config(self, n: int, couplings) -> GeneralMachineConfig:
        gamma1 = 0.1 if self.gamma1 is None else self.gamma1
        gamma_sink = 0.1 if self.gamma3 is None else self.gamma3
        return GeneralMachineConfig(
            n=n, couplings=tuple(couplings), T=self.T, gamma1=gamma1, gamma_sink=(gamma_sink,) * (n - 1)
        )


def _field_types() -> dict[str, typing.Any]:
    return typing.get_type_hints(ExperimentConfig)


def _coerce(name: str, raw: str, tp) -> typing.Any:
    raw = raw.strip()
    args = typing.get_args(tp)
    if type(None) in args:
        if raw.lower() in ("none", ""):
            return None
        tp = next(a for a in args if a is not type(None))
    origin = typing.get_origin(tp)
    try:
        if origin is list:
            (item,) = typing.get_args(tp)
            return [item(x) for x in raw.split(",") if x.strip()]
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def update_from_pairs(cfg: ExperimentConfig, pairs: dict[str, str]) -> ExperimentConfig:
    types = _field_types()
    values = {}
    for key, raw in pairs.items():
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, raw, types[key])
    return dataclasses.replace(cfg, **values)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=None, interpolation=None)
    parser.optionxform = str  # keys are case sensitive (U vs u)
    try:
        parser.read_string("[qtm]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return update_from_pairs(base or ExperimentConfig(), dict(parser["qtm"]))


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def parse_overrides(items: list[str]) -> dict[str, str]:
    pairs = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        pairs[key.strip()] = value
    return pairs


def echo_lines(cfg: ExperimentConfig) -> list[str]:
    """``key = value`` lines for every result-affecting key, readable by :func:`parse_config`."""
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name in EXECUTION_KEYS:
            continue
        lines.append(f"{f.name} = {_format(getattr(cfg, f.name))}")
    return lines


def parse_echo(lines: list[str]) -> ExperimentConfig:
    """Recover a config from the ``# key = value`` header of an output file."""
    body = []
    for line in lines:
        stripped = line.lstrip("#").strip()
        if " = " in stripped:
            body.append(stripped)
    return parse_config("\n".join(body))

