"""Metric parameter blocks with their published defaults and JSON round-tripping."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ..errors import ParameterError


def _require_positive(obj) -> None:
    for f in fields(obj):
        value = getattr(obj, f.name)
        if not value > 0:
            raise ParameterError(f"{type(obj).__name__}.{f.name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SSIMParams:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        _require_positive(self)
        if self.window_size % 2 == 0:
            raise ParameterError(f"SSIM window_size must be odd, got {self.window_size}")


@dataclass(frozen=True)
class VIFParams:
    scales: int = 4
    noise_variance: float = 2.0
    eps: float = 1e-10

    def __post_init__(self):
        _require_positive(self)


@dataclass(frozen=True)
class FSIMParams:
    pc_scales: int = 4
    pc_orientations: int = 4
    min_wavelength: float = 6.0
    scale_mult: float = 2.0
    sigma_on_f: float = 0.55
    d_theta_on_sigma: float = 1.2
    noise_k: float = 2.0
    t1: float = 0.85
    t2: float = 160.0
    downsample_target: int = 256

    def __post_init__(self):
        _require_positive(self)


@dataclass(frozen=True)
class GMSDParams:
    c: float = 170.0

    def __post_init__(self):
        _require_positive(self)


_BLOCKS = {"ssim": SSIMParams, "vif": VIFParams, "fsim": FSIMParams, "gmsd": GMSDParams}


@dataclass(frozen=True)
class MetricParams:
    ssim: SSIMParams = field(default_factory=SSIMParams)
    vif: VIFParams = field(default_factory=VIFParams)
    fsim: FSIMParams = field(default_factory=FSIMParams)
    gmsd: GMSDParams = field(default_factory=GMSDParams)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict | None) -> "MetricParams":
        """Build from a (possibly partial) mapping keyed by lowercase metric name."""
        data = data or {}
        unknown = set(data) - set(_BLOCKS)
        if unknown:
            raise ParameterError(f"unknown metric blocks in config: {sorted(unknown)}")
        blocks = {}
        for name, block_cls in _BLOCKS.items():
            raw = data.get(name, {})
            allowed = {f.name for f in fields(block_cls)}
            extra = set(raw) - allowed
            if extra:
                raise ParameterError(f"unknown {name} parameters: {sorted(extra)}")
            blocks[name] = block_cls(**raw)
        return cls(**blocks)
