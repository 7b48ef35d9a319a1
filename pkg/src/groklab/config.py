"""Flat run configuration shared by the config file and CLI flags."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .metrics import ALL_METRICS, DEFAULT_METRICS
from .sfm import SfmConfig
from .tasks import TaskSpec


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending setting."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _int_list(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(" ", "").split(",") if t]


def _grid(text: str) -> list[tuple[int, int]]:
    pairs = []
    for tok in str(text).replace(" ", "").split(","):
        if tok:
            q, b = tok.lower().split("x")
            pairs.append((int(q), int(b)))
    return pairs


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    if text is None or str(text).lower() in ("", "none"):
        return None
    return float(text)


@dataclass
class RunConfig:
    """Everything a train/sweep run needs.

    ``seeds`` lists init seeds; ``split_seed`` fixes the train/test split.
    ``bdm_grid`` is a list of (alphabet, block side) pairs, written
    ``4x4,2x8`` in files and on the command line.
    """
    p: int = 29
    op: str = "add"
    beta: float = 0.0024
    eta: float = 0.5
    max_steps: int = 3000
    batch_size: int = 512
    eps_gen: float = 1.0
    record_every: int = 1
    init: str = "gaussian"
    init_scale: float | None = None
    reindex: bool = True
    tau_sample_size: str = "train"
    c_float: float = 64.0
    frac: float = 0.5
    split_seed: int = 0
    seeds: list[int] = field(default_factory=lambda: [0])
    metrics: list[str] = field(default_factory=list)
    metrics_every: int = 25
    bdm_grid: list[tuple[int, int]] = field(default_factory=lambda: [(4, 4)])
    out_dir: str = "runs"

    _PARSERS = {
        "p": int, "max_steps": int, "batch_size": int, "record_every": int,
        "split_seed": int, "metrics_every": int,
        "beta": float, "eta": float, "eps_gen": float, "c_float": float, "frac": float,
        "init_scale": _opt_float, "reindex": _bool,
        "seeds": _int_list, "bdm_grid": _grid,
        "metrics": lambda s: [t for t in str(s).replace(" ", "").split(",") if t],
    }

    def validate(self) -> "RunConfig":
        for s in self.seeds:
            if s < 0:
                raise ConfigError("seeds", f"seed {s} is negative")
        if not self.seeds:
            raise ConfigError("seeds", "need at least one seed")
        bad = [m for m in self.metrics if m not in ALL_METRICS]
        if bad:
            raise ConfigError("metrics", f"unknown {bad}; choose from {ALL_METRICS}")
        if self.metrics_every < 1:
            raise ConfigError("metrics_every", "must be >= 1")
        for q, b in self.bdm_grid:
            if q not in (2, 4, 8) or b not in (2, 4, 8):
                raise ConfigError("bdm_grid", f"({q}, {b}) outside {{2,4,8}}^2")
        try:
            self.task_spec()
        except ValueError as exc:
            raise ConfigError("p/op/frac/split_seed", str(exc)) from None
        try:
            self.sfm_config(self.seeds[0])
        except ValueError as exc:
            raise ConfigError("sfm", str(exc)) from None
        return self

    def task_spec(self) -> TaskSpec:
        return TaskSpec(p=self.p, op=self.op, split_fraction=self.frac, split_seed=self.split_seed)

    def sfm_config(self, seed: int) -> SfmConfig:
        names = {f.name for f in dataclasses.fields(SfmConfig)}
        kw = {k: v for k, v in dataclasses.asdict(self).items() if k in names}
        return SfmConfig(init_seed=seed, **kw)

    def with_updates(self, updates: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(self)}
        parsed = {}
        for key, raw in updates.items():
            if key not in known:
                raise ConfigError(key, "unknown setting")
            parser = self._PARSERS.get(key, str)
            try:
                parsed[key] = raw if not isinstance(raw, str) else parser(raw)
            except ValueError as exc:
                raise ConfigError(key, str(exc)) from None
        return dataclasses.replace(self, **parsed)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if f.name == "bdm_grid":
                v = ",".join(f"{q}x{b}" for q, b in v)
            elif isinstance(v, list):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", f"expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    """File values first, then ``overrides`` (CLI flags) on top, then validate."""
    cfg = RunConfig()
    if path is not None:
        cfg = cfg.with_updates(parse_config_text(Path(path).read_text(), str(path)))
    if overrides:
        cfg = cfg.with_updates({k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


__all__ = ["RunConfig", "ConfigError", "load_config", "parse_config_text", "DEFAULT_METRICS"]
