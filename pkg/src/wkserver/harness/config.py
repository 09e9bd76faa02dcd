"""Experiment configuration: flat ``key = value`` files, env vars and flags.

Precedence, lowest first: built-in defaults, the config file, ``WKS_<KEY>``
environment variables, command-line flags. Keys (``#`` starts a comment):

    weights     comma-separated rationals, rounded up to the constrained regime
    n_points    size of the uniform metric
    d           ``default`` or comma list d_1,d_2,... (d_1 must be 1)
    generator   uniform | phase | chaser
    phases      phases per generated trial (phase / chaser generators)
    length      requests per trial (uniform generator)
    alphabet    optional comma list of points the generator may use
    trials      number of trials (>= 1)
    seed        root seed; every trial derives its own seeds from it
    opt_mode    fixed | free   (initial configuration of the offline optimum)
    initial     comma-separated starting configuration (default 0,1,...,k-1)
    budget      OPT state budget
    verify      yes | no: also check the per-phase lower bound of every trial
    report      CSV output path (empty: no file)
    trace       trace output path for ``simulate`` (empty: no file)
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Mapping, Optional

from ..core import WeightVector, format_weights, parse_config, parse_weights, round_weights
from ..errors import ValidationError
from ..phase_model.constants import ConstantsProfile

ENV_PREFIX = "WKS_"


@dataclass(frozen=True)
class ExperimentConfig:
    weights: str = "1,2"
    n_points: int = 20
    d: str = "default"
    generator: str = "phase"
    phases: int = 3
    length: int = 100
    alphabet: str = ""
    trials: int = 100
    seed: int = 0
    opt_mode: str = "fixed"
    initial: str = ""
    budget: int = 200_000
    verify: bool = False
    report: str = ""
    trace: str = ""

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.n_points < 1:
            raise ValidationError(f"n_points must be >= 1, got {self.n_points}")
        if self.generator not in ("uniform", "phase", "chaser"):
            raise ValidationError(f"generator must be uniform, phase or chaser, got {self.generator!r}")
        if self.opt_mode not in ("fixed", "free"):
            raise ValidationError(f"opt_mode must be fixed or free, got {self.opt_mode!r}")
        if self.phases < 0 or self.length < 0 or self.budget < 1:
            raise ValidationError("phases, length and budget must be non-negative (budget positive)")
        self.rounded_weights  # validates
        self.profile
        if self.initial:
            cfg = self.initial_config
            if len(cfg) != self.k:
                raise ValidationError(f"initial configuration {cfg} needs {self.k} entries")

    @property
    def raw_weights(self) -> WeightVector:
        return parse_weights(self.weights)

    @property
    def rounded_weights(self) -> WeightVector:
        return round_weights(self.raw_weights)

    @property
    def k(self) -> int:
        return self.raw_weights.k

    @property
    def profile(self) -> ConstantsProfile:
        return ConstantsProfile.parse(self.d)

    @property
    def alphabet_points(self) -> Optional[tuple]:
        if not self.alphabet.strip():
            return None
        return tuple(int(x) for x in self.alphabet.split(","))

    @property
    def initial_config(self) -> tuple:
        if self.initial:
            return parse_config(self.initial)
        return tuple(i % self.n_points for i in range(self.k))

    def describe(self) -> str:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        lines.append(f"# rounded weights = {format_weights(self.rounded_weights)}")
        lines.append(f"# profile = {self.profile.describe()}")
        return "\n".join(lines)


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value: str):
    kind = _TYPES[key]
    value = value.strip()
    if kind == "int":
        try:
            return int(value)
        except ValueError:
            raise ValidationError(f"{key} expects an integer, got {value!r}") from None
    if kind == "bool":
        low = value.lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off", ""):
            return False
        raise ValidationError(f"{key} expects yes/no, got {value!r}")
    return value


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{n}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ValidationError(f"{source}:{n}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def env_overrides(env: Mapping[str, str]) -> dict:
    out = {}
    for key in _TYPES:
        name = ENV_PREFIX + key.upper()
        if name in env:
            out[key] = _coerce(key, env[name])
    return out


def load_config(path: Optional[str] = None, flags: Optional[dict] = None,
                env: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    values: dict = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), path))
    values.update(env_overrides(os.environ if env is None else env))
    for key, value in (flags or {}).items():
        if value is not None:
            values[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    return ExperimentConfig(**values)


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
