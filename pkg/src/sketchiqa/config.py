"""JSON run configuration (schema version 1).

Example::

    {
      "version": 1,
      "seed": 20160501,
      "metrics": {"ssim": {"window_size": 11}, "gmsd": {"c": 170}},
      "synthesis": {"patch_size": 8, "overlap": 4, "K": 5, "search_radius": 5, "lambda": 1e-4},
      "protocol": {"train_count": 150, "repeats": 100},
      "eigenface": {"retain": 0.99, "sweep": false},
      "selected_metrics": ["ssim", "vif", "fsim", "gmsd"],
      "galleries": ["lle"]
    }

Every block is optional; missing fields take their defaults.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ParameterError
from .evaluation import EigenfaceSpec, SplitProtocol
from .metrics import MetricKind, MetricParams
from .synthesis import SynthesisParams

DEFAULT_SEED = 20160501
SCHEMA_VERSION = 1

_SYNTH_ALIASES = {"K": "k", "lambda": "lam"}


def _build(cls, raw: dict, block: str, aliases: dict | None = None):
    raw = {(aliases or {}).get(k, k): v for k, v in (raw or {}).items()}
    allowed = {f.name for f in fields(cls)}
    extra = set(raw) - allowed
    if extra:
        raise ParameterError(f"unknown {block} parameters: {sorted(extra)}")
    return cls(**raw)


@dataclass(frozen=True)
class RunConfig:
    metrics: MetricParams = field(default_factory=MetricParams)
    synthesis: SynthesisParams = field(default_factory=SynthesisParams)
    protocol: SplitProtocol = field(default_factory=lambda: SplitProtocol(seed=DEFAULT_SEED))
    eigenface: EigenfaceSpec = field(default_factory=EigenfaceSpec)
    selected_metrics: tuple[MetricKind, ...] = tuple(MetricKind)
    galleries: tuple[str, ...] = ()
    output: str | None = None
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        version = data.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ParameterError(f"unsupported config version {version!r}")
        known = {"version", "seed", "metrics", "synthesis", "protocol", "eigenface", "selected_metrics", "galleries", "output"}
        extra = set(data) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        seed = int(data.get("seed", DEFAULT_SEED))
        protocol = dict(data.get("protocol", {}))
        protocol.setdefault("seed", seed)
        return cls(
            metrics=MetricParams.from_dict(data.get("metrics")),
            synthesis=_build(SynthesisParams, data.get("synthesis"), "synthesis", _SYNTH_ALIASES),
            protocol=_build(SplitProtocol, protocol, "protocol"),
            eigenface=_build(EigenfaceSpec, data.get("eigenface"), "eigenface"),
            selected_metrics=tuple(MetricKind.parse(m) for m in data.get("selected_metrics", [k.value for k in MetricKind])),
            galleries=tuple(data.get("galleries", ())),
            output=data.get("output"),
            seed=seed,
        )

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ParameterError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        synth = asdict(self.synthesis)
        return {
            "version": SCHEMA_VERSION,
            "seed": self.seed,
            "metrics": self.metrics.to_dict(),
            "synthesis": {"patch_size": synth["patch_size"], "overlap": synth["overlap"], "K": synth["k"],
                          "search_radius": synth["search_radius"], "lambda": synth["lam"]},
            "protocol": asdict(self.protocol),
            "eigenface": asdict(self.eigenface),
            "selected_metrics": [k.value for k in self.selected_metrics],
            "galleries": list(self.galleries),
            "output": self.output,
        }
