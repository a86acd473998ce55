"""Experiment configuration shared by the CLI and the scripts."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from moddist.generators import InvalidParams, ModularDistanceParams
from moddist.quotient_graphs import DEFAULT_VERTEX_CAP
from moddist.spectral import DEFAULT_MARGIN, RefinementConfig

OUTPUT_DIR_ENV = "MODDIST_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    p: int = 1
    q: int = 2
    k: int = 1
    n: int = 1
    n_sweep: list[int] = field(default_factory=list)
    grid: int = 64
    levels: int = 16
    starts: int = 32
    resonance_seeds: bool = True
    moduli: list[int] = field(default_factory=list)
    max_scale: int = 4
    vertex_cap: int = DEFAULT_VERTEX_CAP
    format: str = "json"
    output: Optional[str] = None
    margin: float = DEFAULT_MARGIN
    certify: bool = False
    target_separation: float = 0.05
    threads: Optional[int] = None

    @property
    def params(self) -> ModularDistanceParams:
        return ModularDistanceParams(self.p, self.q, self.k)

    @property
    def sweep(self) -> list[int]:
        return list(self.n_sweep) if self.n_sweep else [self.n]

    def refinement(self) -> RefinementConfig:
        return RefinementConfig(
            starts=self.starts,
            levels=self.levels,
            resonance_seeds=self.resonance_seeds,
            certify=self.certify,
            target_separation=self.target_separation,
        )

    def validate(self) -> "ExperimentConfig":
        try:
            self.params
        except InvalidParams as exc:
            raise ConfigError(str(exc)) from exc
        if self.n < 1 or any(n < 1 for n in self.sweep):
            raise ConfigError("n must be at least 1")
        if self.grid < 2:
            raise ConfigError("grid must be at least 2")
        if self.levels < 0 or self.starts < 1:
            raise ConfigError("levels must be >= 0 and starts >= 1")
        if any(m < 2 for m in self.moduli):
            raise ConfigError("quotient moduli must be at least 2")
        if self.max_scale < 1:
            raise ConfigError("max_scale must be at least 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if not 0 <= self.margin < 1:
            raise ConfigError("margin must lie in [0, 1)")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be positive")
        return self

    @classmethod
    def from_mapping(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_mapping(doc)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def output_path(self, command: str) -> Optional[Path]:
        """Explicit output, else $MODDIST_OUTPUT_DIR/<command>.<format>, else stdout."""
        if self.output and self.output != "-":
            path = Path(self.output)
            base = os.environ.get(OUTPUT_DIR_ENV)
            if base and not path.is_absolute():
                path = Path(base) / path
            return path
        if self.output is None and os.environ.get(OUTPUT_DIR_ENV):
            return Path(os.environ[OUTPUT_DIR_ENV]) / f"{command}.{self.format}"
        return None
