# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

from dataclasses import dataclass
import math

import numpy as np
from skimage.metrics import structural_similarity

from .consts import INTENSITY_MAX, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW
from .exception import DimensionMismatch, InvalidParameter
from .image import ImageGrid

INFINITE_DB = math.inf


@dataclass
class QualityReport:
    """Quality report class.

    One row of the result tables: metrics of a restored image against the
    clean reference, iteration count and wall time of the solve.
    """

    psnr: float
    snr: float
    ssim: float
    iterations: int = 0
    cpu_seconds: float = 0.0


def _pair(u: ImageGrid, ref: ImageGrid):
    if u.shape != ref.shape:
        raise DimensionMismatch(ref.shape, u.shape)
    return (np.clip(u.data, 0.0, INTENSITY_MAX),
            np.clip(ref.data, 0.0, INTENSITY_MAX))


def psnr(u: ImageGrid, ref: ImageGrid) -> float:
    """10 log10(255^2 / MSE); infinite for identical images."""
    a, b = _pair(u, ref)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return INFINITE_DB
    return 10.0 * math.log10(INTENSITY_MAX ** 2 / mse)


def snr(u: ImageGrid, ref: ImageGrid) -> float:
    """20 log10(||ref|| / ||ref - u||); infinite for identical images."""
    a, b = _pair(u, ref)
    signal = float(np.linalg.norm(b))
    if signal == 0:
        raise InvalidParameter('SNR undefined for an all-zero reference')
    error = float(np.linalg.norm(b - a))
    if error == 0:
        return INFINITE_DB
    return 20.0 * math.log10(signal / error)


def ssim_global(u: np.ndarray, ref: np.ndarray) -> float:
    """Single-window SSIM over the whole image."""
    c1 = (SSIM_K1 * INTENSITY_MAX) ** 2
    c2 = (SSIM_K2 * INTENSITY_MAX) ** 2
    mu_u = u.mean()
    mu_r = ref.mean()
    var_u = np.mean((u - mu_u) ** 2)
    var_r = np.mean((ref - mu_r) ** 2)
    cov = np.mean((u - mu_u) * (ref - mu_r))
    return float(((2 * mu_u * mu_r + c1) * (2 * cov + c2))
                 / ((mu_u ** 2 + mu_r ** 2 + c1) * (var_u + var_r + c2)))


def ssim(u: ImageGrid, ref: ImageGrid, windowed: bool = True) -> float:
    """Structural similarity.

    The default is the mean of the 11x11 Gaussian-windowed (sigma 1.5) local
    SSIM map over all full windows; `windowed=False` evaluates the global
    single-window formula.
    """

    a, b = _pair(u, ref)
    if not windowed:
        return ssim_global(a, b)
    if min(a.shape) < SSIM_WINDOW:
        raise InvalidParameter(
            'SSIM needs images of at least %dx%d, got %dx%d' % (
                (SSIM_WINDOW, SSIM_WINDOW) + a.shape))
    return float(structural_similarity(
        a, b,
        data_range=INTENSITY_MAX,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=SSIM_K1,
        K2=SSIM_K2))


def evaluate(u: ImageGrid, ref: ImageGrid, iterations: int = 0,
             cpu_seconds: float = 0.0, windowed: bool = True) -> QualityReport:
    return QualityReport(
        psnr=psnr(u, ref),
        snr=snr(u, ref),
        ssim=ssim(u, ref, windowed=windowed),
        iterations=iterations,
        cpu_seconds=cpu_seconds)
