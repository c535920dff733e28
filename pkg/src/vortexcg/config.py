"""Run configuration: a YAML tree validated before any compute."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import yaml

from .errors import ConfigError
from .initial import NAMES, InitialCondition

_INITIAL_KEYS = {f.name for f in fields(InitialCondition)}


@dataclass(frozen=True)
class RunConfig:
    n: int = 64
    tau: float = 0.1
    tau_list: tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    t_final: float = 0.5
    sigma: float = 2.0
    norm_indices: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)
    initial: InitialCondition = field(default_factory=InitialCondition)
    fp_tol: float = 1e-12
    max_iter: int = 50
    dt_ref: float | None = None
    snapshot_every: int = 0
    output_dir: str = "out"
    recenter: bool = True
    slope_tol: float | None = None
    threads: int | None = None

    @classmethod
    def from_mapping(cls, data: dict | None) -> "RunConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown key")
        kw = {}
        for key, value in data.items():
            if key == "initial":
                kw[key] = _initial(value)
            elif key in ("tau_list", "norm_indices"):
                if not isinstance(value, (list, tuple)):
                    raise ConfigError(key, "expected a list")
                kw[key] = tuple(_number(f"{key}[{i}]", v) for i, v in enumerate(value))
            else:
                kw[key] = value
        cfg = cls(**kw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        return cls.from_mapping(data)

    def override(self, **changes) -> "RunConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        if "seed" in changes:
            changes["initial"] = replace(self.initial, seed=changes.pop("seed"))
        cfg = replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        _int("n", self.n)
        if self.n < 8 or self.n % 2:
            raise ConfigError("n", "must be an even integer >= 8")
        tau = _number("tau", self.tau)
        if not 0 < tau < 1:
            raise ConfigError("tau", "must lie in (0, 1)")
        t_final = _number("t_final", self.t_final)
        if t_final < tau:
            raise ConfigError("t_final", "must be >= tau")
        taus = self.tau_list
        if len(taus) < 3:
            raise ConfigError("tau_list", "needs at least 3 entries")
        if any(not 0 < t < 1 for t in taus):
            raise ConfigError("tau_list", "entries must lie in (0, 1)")
        for a, b in zip(taus, taus[1:]):
            if not math.isclose(b, a / 2, rel_tol=1e-9):
                raise ConfigError("tau_list", "each entry must be half the previous one")
        for t in taus:
            r = t_final / t
            if abs(r - round(r)) > 1e-9 * r:
                raise ConfigError("t_final", f"not a multiple of tau_list entry {t}")
        if _number("sigma", self.sigma) < 0:
            raise ConfigError("sigma", "must be >= 0")
        if not self.norm_indices or any(s < 0 for s in self.norm_indices):
            raise ConfigError("norm_indices", "must be a non-empty list of values >= 0")
        if not _number("fp_tol", self.fp_tol) > 0:
            raise ConfigError("fp_tol", "must be positive")
        if _int("max_iter", self.max_iter) < 1:
            raise ConfigError("max_iter", "must be >= 1")
        if self.dt_ref is not None:
            if not _number("dt_ref", self.dt_ref) > 0:
                raise ConfigError("dt_ref", "must be positive")
            if self.dt_ref > min(taus) / 10:
                raise ConfigError("dt_ref", "must be <= min(tau_list)/10")
        if _int("snapshot_every", self.snapshot_every) < 0:
            raise ConfigError("snapshot_every", "must be >= 0")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir", "must be a non-empty string")
        if not isinstance(self.recenter, bool):
            raise ConfigError("recenter", "must be true or false")
        if self.slope_tol is not None and not _number("slope_tol", self.slope_tol) > 0:
            raise ConfigError("slope_tol", "must be positive")
        if self.threads is not None and _int("threads", self.threads) < 1:
            raise ConfigError("threads", "must be >= 1")
        if self.initial.band_limit() > self.n // 4:
            raise ConfigError("initial", f"band limit {self.initial.band_limit()} exceeds n/4")

    def to_mapping(self) -> dict:
        d = asdict(self)
        d["tau_list"] = list(self.tau_list)
        d["norm_indices"] = list(self.norm_indices)
        return d


def _number(key, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(key, f"expected a finite number, got {value!r}")
    return float(value)


def _int(key, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return value


def _initial(value) -> InitialCondition:
    if isinstance(value, str):
        value = {"name": value}
    if not isinstance(value, dict):
        raise ConfigError("initial", "expected a mapping or a name")
    for key in value:
        if key not in _INITIAL_KEYS:
            raise ConfigError(f"initial.{key}", "unknown key")
    if value.get("name", "perturbed_eigen") not in NAMES:
        raise ConfigError("initial.name", f"must be one of {', '.join(NAMES)}")
    for key in ("amplitude", "epsilon", "s"):
        if key in value:
            _number(f"initial.{key}", value[key])
    for key in ("cutoff", "seed"):
        if key in value:
            _int(f"initial.{key}", value[key])
    return InitialCondition(**value)
