"""Feature similarity (phase congruency + gradient magnitude).

Phase congruency uses a frequency-domain log-Gabor bank. For each orientation
the local energy is the modulus of the summed complex scale responses, reduced
by a noise threshold estimated from the smallest-scale amplitude: the median
squared amplitude over ln 2 gives the Rayleigh noise power, which is propagated
through the filter bank to a threshold of mean + k standard deviations of the
noise energy.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from ..errors import SizeError
from ..imaging import as_image, block_average, gradient_magnitude
from ._common import check_pair, check_same_shape
from .params import FSIMParams

PC_EPS = 1e-4
_LOWPASS_CUTOFF = 0.45
_LOWPASS_ORDER = 15
MIN_SIDE = 32


def decimation_factor(shape: tuple[int, int], target: int) -> int:
    return max(1, int(math.floor(min(shape) / target + 0.5)))


@lru_cache(maxsize=16)
def _filter_bank(shape: tuple[int, int], p: FSIMParams) -> np.ndarray:
    """Log-Gabor transfer functions, shape (orientations, scales, rows, cols), DC at [0, 0]."""
    rows, cols = shape
    v = np.fft.fftfreq(rows)[:, None]
    u = np.fft.fftfreq(cols)[None, :]
    radius = np.sqrt(u * u + v * v)
    radius[0, 0] = 1.0
    theta = np.arctan2(-v, u)
    sin_t, cos_t = np.sin(theta), np.cos(theta)

    lowpass = 1.0 / (1.0 + (radius / _LOWPASS_CUTOFF) ** (2 * _LOWPASS_ORDER))
    radial = []
    for s in range(p.pc_scales):
        f0 = 1.0 / (p.min_wavelength * p.scale_mult**s)
        lg = np.exp(-(np.log(radius / f0) ** 2) / (2.0 * math.log(p.sigma_on_f) ** 2)) * lowpass
        lg[0, 0] = 0.0
        radial.append(lg)

    theta_sigma = math.pi / p.pc_orientations / p.d_theta_on_sigma
    bank = np.empty((p.pc_orientations, p.pc_scales, rows, cols))
    for o in range(p.pc_orientations):
        angle = o * math.pi / p.pc_orientations
        ds = sin_t * math.cos(angle) - cos_t * math.sin(angle)
        dc = cos_t * math.cos(angle) + sin_t * math.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        spread = np.exp(-(dtheta**2) / (2.0 * theta_sigma**2))
        for s in range(p.pc_scales):
            bank[o, s] = radial[s] * spread
    bank.setflags(write=False)
    return bank


class NoiseGain(NamedTuple):
    """Filter-only quantities needed to propagate noise power to noise energy."""

    smallest_power: float  # sum of squared smallest-scale transfer function
    sum_an2: float
    sum_aiaj: float


@lru_cache(maxsize=16)
def _noise_gains(shape: tuple[int, int], p: FSIMParams) -> tuple[NoiseGain, ...]:
    rows, cols = shape
    bank = _filter_bank(shape, p)
    gains = []
    for o in range(p.pc_orientations):
        spatial = np.real(np.fft.ifft2(bank[o], axes=(-2, -1))) * math.sqrt(rows * cols)
        sum_aiaj = 0.0
        for i in range(p.pc_scales):
            for j in range(i + 1, p.pc_scales):
                sum_aiaj += float(np.sum(spatial[i] * spatial[j]))
        gains.append(NoiseGain(float(np.sum(bank[o, 0] ** 2)), float(np.sum(spatial**2)), sum_aiaj))
    return tuple(gains)


def noise_threshold(smallest_amplitude: np.ndarray, gain: NoiseGain, k: float) -> float:
    median_sq = float(np.median(smallest_amplitude**2))
    noise_power = (median_sq / math.log(2.0)) / gain.smallest_power
    noise_energy_sq = 2.0 * noise_power * gain.sum_an2 + 4.0 * noise_power * gain.sum_aiaj
    tau = math.sqrt(max(noise_energy_sq, 0.0) / 2.0)
    mean = tau * math.sqrt(math.pi / 2.0)
    sigma = tau * math.sqrt(2.0 - math.pi / 2.0)
    return mean + k * sigma


def phase_congruency(img, p: FSIMParams = FSIMParams()) -> np.ndarray:
    img = as_image(img)
    bank = _filter_bank(img.shape, p)
    gains = _noise_gains(img.shape, p)
    spectrum = np.fft.fft2(img)
    energy_total = np.zeros(img.shape)
    amplitude_total = np.zeros(img.shape)
    for o in range(p.pc_orientations):
        responses = np.fft.ifft2(spectrum[None] * bank[o], axes=(-2, -1))
        amplitudes = np.abs(responses)
        energy = np.abs(responses.sum(axis=0))
        threshold = noise_threshold(amplitudes[0], gains[o], p.noise_k)
        energy_total += np.maximum(energy - threshold, 0.0)
        amplitude_total += amplitudes.sum(axis=0)
    return energy_total / (PC_EPS + amplitude_total)


class FSIMFeatures(NamedTuple):
    pc: np.ndarray
    grad: np.ndarray


def fsim_features(img, p: FSIMParams = FSIMParams()) -> FSIMFeatures:
    img = as_image(img)
    if min(img.shape) < MIN_SIDE:
        raise SizeError(f"FSIM needs min side >= {MIN_SIDE}, got {img.shape}")
    img = block_average(img, decimation_factor(img.shape, p.downsample_target))
    return FSIMFeatures(phase_congruency(img, p), gradient_magnitude(img, "scharr"))


def fsim_from_features(fx: FSIMFeatures, fy: FSIMFeatures, p: FSIMParams = FSIMParams()) -> float:
    check_same_shape(fx.pc, fy.pc)
    s_pc = (2.0 * fx.pc * fy.pc + p.t1) / (fx.pc**2 + fy.pc**2 + p.t1)
    s_g = (2.0 * fx.grad * fy.grad + p.t2) / (fx.grad**2 + fy.grad**2 + p.t2)
    sim = s_pc * s_g
    weight = np.maximum(fx.pc, fy.pc)
    total = weight.sum()
    if total <= 0.0:
        # No congruent structure survives the noise threshold in either image.
        return float(sim.mean())
    return float(np.sum(sim * weight) / total)


def fsim_value(ref, dist, p: FSIMParams = FSIMParams()) -> float:
    ref, dist = check_pair(ref, dist)
    return fsim_from_features(fsim_features(ref, p), fsim_features(dist, p), p)
