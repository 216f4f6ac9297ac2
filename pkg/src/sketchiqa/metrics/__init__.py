"""Full-reference IQA metrics with explicit score polarity.

Every metric is split into a per-image ``features`` step and a pairwise
``compare`` step so that a gallery can be prepared once and scored against
many probes; :func:`compute_metric` simply runs both steps.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from ..errors import ParameterError
from ._common import check_pair
from .fsim import fsim_features, fsim_from_features, fsim_value, phase_congruency
from .gmsd import gmsd_features, gmsd_from_features, gmsd_value
from .params import FSIMParams, GMSDParams, MetricParams, SSIMParams, VIFParams
from .ssim import ssim_features, ssim_map, ssim_map_from_features, ssim_value
from .vif import vif_features, vif_from_features, vif_value

__all__ = [
    "MetricKind",
    "Polarity",
    "MetricScore",
    "MetricParams",
    "SSIMParams",
    "VIFParams",
    "FSIMParams",
    "GMSDParams",
    "ssim",
    "vif",
    "fsim",
    "gmsd",
    "compute_metric",
    "prepare",
    "compare",
    "ssim_map",
    "phase_congruency",
]


class MetricKind(str, enum.Enum):
    SSIM = "ssim"
    VIF = "vif"
    FSIM = "fsim"
    GMSD = "gmsd"

    @classmethod
    def parse(cls, name) -> "MetricKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ParameterError(
                f"unknown metric {name!r}; expected one of {[k.value for k in cls]}"
            ) from None


class Polarity(str, enum.Enum):
    SIMILARITY = "similarity"  # higher is better
    DISTORTION = "distortion"  # lower is better


POLARITY = {
    MetricKind.SSIM: Polarity.SIMILARITY,
    MetricKind.VIF: Polarity.SIMILARITY,
    MetricKind.FSIM: Polarity.SIMILARITY,
    MetricKind.GMSD: Polarity.DISTORTION,
}


@dataclass(frozen=True)
class MetricScore:
    value: float
    polarity: Polarity

    def better_than(self, other: "MetricScore") -> bool:
        if self.polarity is Polarity.SIMILARITY:
            return self.value > other.value
        return self.value < other.value


def ssim(ref, dist, p: MetricParams = MetricParams()) -> MetricScore:
    return MetricScore(ssim_value(ref, dist, p.ssim), Polarity.SIMILARITY)


def vif(ref, dist, p: MetricParams = MetricParams()) -> MetricScore:
    return MetricScore(vif_value(ref, dist, p.vif), Polarity.SIMILARITY)


def fsim(ref, dist, p: MetricParams = MetricParams()) -> MetricScore:
    return MetricScore(fsim_value(ref, dist, p.fsim), Polarity.SIMILARITY)


def gmsd(ref, dist, p: MetricParams = MetricParams()) -> MetricScore:
    return MetricScore(gmsd_value(ref, dist, p.gmsd), Polarity.DISTORTION)


_FEATURES: dict[MetricKind, Callable[[np.ndarray, MetricParams], Any]] = {
    MetricKind.SSIM: lambda img, p: ssim_features(img, p.ssim),
    MetricKind.VIF: lambda img, p: vif_features(img, p.vif),
    MetricKind.FSIM: lambda img, p: fsim_features(img, p.fsim),
    MetricKind.GMSD: lambda img, p: gmsd_features(img),
}

_COMPARE: dict[MetricKind, Callable[[Any, Any, MetricParams], float]] = {
    MetricKind.SSIM: lambda a, b, p: float(ssim_map_from_features(a, b, p.ssim).mean()),
    MetricKind.VIF: lambda a, b, p: vif_from_features(a, b, p.vif),
    MetricKind.FSIM: lambda a, b, p: fsim_from_features(a, b, p.fsim),
    MetricKind.GMSD: lambda a, b, p: gmsd_from_features(a, b, p.gmsd),
}


def prepare(kind, img, p: MetricParams = MetricParams()):
    """Per-image features for ``kind``; feed two of them to :func:`compare`."""
    return _FEATURES[MetricKind.parse(kind)](img, p)


def compare(kind, ref_features, dist_features, p: MetricParams = MetricParams()) -> MetricScore:
    kind = MetricKind.parse(kind)
    return MetricScore(_COMPARE[kind](ref_features, dist_features, p), POLARITY[kind])


def compute_metric(kind, ref, dist, p: MetricParams = MetricParams()) -> MetricScore:
    kind = MetricKind.parse(kind)
    ref, dist = check_pair(ref, dist)
    return compare(kind, prepare(kind, ref, p), prepare(kind, dist, p), p)
