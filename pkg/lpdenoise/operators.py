# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

"""Discrete operators with periodic boundary conditions.

Forward differences, point spread functions, circular convolution and the
FFT-diagonalized solve of (gamma3 A*A - (mu + gamma1) Laplacian) u = rhs.
DFT convention: unnormalized forward transform, 1/N inverse (numpy default).
"""

from dataclasses import dataclass
import math
from typing import Tuple

import numpy as np

from .exception import DimensionMismatch, InvalidParameter

EPS = np.finfo(np.float64).eps


def grad_x(u: np.ndarray) -> np.ndarray:
    """Periodic forward difference along rows: u[i, j+1] - u[i, j]."""
    return np.roll(u, -1, axis=1) - u


def grad_y(u: np.ndarray) -> np.ndarray:
    """Periodic forward difference along columns: u[i+1, j] - u[i, j]."""
    return np.roll(u, -1, axis=0) - u


def grad_x_adjoint(v: np.ndarray) -> np.ndarray:
    return np.roll(v, 1, axis=1) - v


def grad_y_adjoint(w: np.ndarray) -> np.ndarray:
    return np.roll(w, 1, axis=0) - w


def laplacian(u: np.ndarray) -> np.ndarray:
    """Five-point periodic Laplacian, equal to -(Dx^T Dx + Dy^T Dy)."""
    return (np.roll(u, 1, axis=0) + np.roll(u, -1, axis=0)
            + np.roll(u, 1, axis=1) + np.roll(u, -1, axis=1) - 4.0 * u)


@dataclass(frozen=True, eq=False)
class Psf:
    """Point spread function class.

    Non-negative, unit-sum kernel with odd dimensions, anchored at its
    centre tap.
    """

    weights: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        if weights.ndim != 2:
            raise InvalidParameter('PSF must be two dimensional')
        if weights.shape[0] % 2 == 0 or weights.shape[1] % 2 == 0:
            raise InvalidParameter(
                'PSF dimensions must be odd, got %dx%d' % weights.shape)
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InvalidParameter('PSF weights must be finite and non-negative')
        if abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidParameter('PSF weights must sum to 1, got %r' % weights.sum())
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def normalized(cls, weights: np.ndarray) -> 'Psf':
        weights = np.asarray(weights, dtype=np.float64)
        return cls(weights / weights.sum())

    @classmethod
    def identity(cls) -> 'Psf':
        return cls(np.ones((1, 1)))

    @property
    def kheight(self) -> int:
        return self.weights.shape[0]

    @property
    def kwidth(self) -> int:
        return self.weights.shape[1]

    @property
    def anchor(self) -> Tuple[int, int]:
        return self.kheight // 2, self.kwidth // 2

    def transfer(self, height: int, width: int) -> np.ndarray:
        """2D DFT of the PSF zero-padded to (height, width), centre at (0, 0)."""
        if self.kheight > height or self.kwidth > width:
            raise InvalidParameter(
                'PSF %dx%d is larger than image %dx%d' % (
                    self.kheight, self.kwidth, height, width))
        padded = np.zeros((height, width))
        padded[:self.kheight, :self.kwidth] = self.weights
        padded = np.roll(padded, (-self.anchor[0], -self.anchor[1]), axis=(0, 1))
        return np.fft.fft2(padded)


def make_motion_psf(length: float, angle: float) -> Psf:
    """Linear motion kernel with MATLAB fspecial('motion') semantics.

    A line segment of the given length through the centre at the given angle
    (degrees, counter-clockwise), pixel weights given by the coverage of a
    one pixel wide line.
    """

    if length < 1:
        raise InvalidParameter('Motion length must be at least 1, got %r' % length)

    half = (length - 1) / 2.0
    phi = math.radians(angle % 180.0)
    cosphi = math.cos(phi)
    sinphi = math.sin(phi)
    xsign = 1.0 if cosphi >= 0 else -1.0
    linewdt = 1.0

    # half matrix; the eps terms keep 0 and 90 degrees at the right size
    sx = math.trunc(half * cosphi + linewdt * xsign - length * EPS)
    sy = math.trunc(half * sinphi + linewdt - length * EPS)
    xs = np.arange(0, sx + xsign, xsign)
    ys = np.arange(0, sy + 1)
    x, y = np.meshgrid(xs, ys)

    dist2line = y * cosphi - x * sinphi
    rad = np.sqrt(x ** 2 + y ** 2)

    lastpix = (rad >= half) & (np.abs(dist2line) <= linewdt)
    x2lastpix = half - np.abs((x[lastpix] + dist2line[lastpix] * sinphi) / cosphi)
    dist2line[lastpix] = np.sqrt(dist2line[lastpix] ** 2 + x2lastpix ** 2)
    dist2line = linewdt + EPS - np.abs(dist2line)
    dist2line[dist2line < 0] = 0

    rows, cols = dist2line.shape
    h = np.zeros((2 * rows - 1, 2 * cols - 1))
    h[:rows, :cols] = np.rot90(dist2line, 2)
    h[rows - 1:, cols - 1:] = dist2line

    if cosphi > 0:
        h = np.flipud(h)

    return Psf.normalized(h)


def make_gaussian_psf(radius: int, sigma: float) -> Psf:
    """(2 radius + 1)^2 sampled Gaussian kernel, normalized to sum 1."""

    if radius < 0:
        raise InvalidParameter('Gaussian radius must be non-negative, got %r' % radius)
    if not sigma > 0:
        raise InvalidParameter('Gaussian sigma must be positive, got %r' % sigma)

    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    x, y = np.meshgrid(offsets, offsets)
    return Psf.normalized(np.exp(-(x ** 2 + y ** 2) / (2.0 * sigma ** 2)))


def convolve_periodic(u: np.ndarray, psf: Psf) -> np.ndarray:
    """Circular convolution of u with the PSF (the blur operator A)."""
    if psf.kheight == 1 and psf.kwidth == 1:
        return u * psf.weights[0, 0]
    return np.fft.ifft2(np.fft.fft2(u) * psf.transfer(*u.shape)).real


def convolve_periodic_adjoint(u: np.ndarray, psf: Psf) -> np.ndarray:
    """Circular correlation with the PSF (the adjoint A*)."""
    if psf.kheight == 1 and psf.kwidth == 1:
        return u * psf.weights[0, 0]
    return np.fft.ifft2(np.fft.fft2(u) * np.conj(psf.transfer(*u.shape))).real


def _difference_symbols(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    dx = np.zeros((height, width))
    dx[0, 0] = -1.0
    dx[0, -1 % width] += 1.0
    dy = np.zeros((height, width))
    dy[0, 0] = -1.0
    dy[-1 % height, 0] += 1.0
    return np.fft.fft2(dx), np.fft.fft2(dy)


@dataclass(frozen=True, eq=False)
class SpectralKernel:
    """Spectral kernel class.

    Frequency-domain data of the u-subproblem operator
    gamma3 |A|^2 + (mu + gamma1) (|gx|^2 + |gy|^2) for one image size.
    Immutable once built.
    """

    height: int
    width: int
    transfer: np.ndarray
    grad_x_symbol: np.ndarray
    grad_y_symbol: np.ndarray
    denom: np.ndarray
    mu: float
    gamma1: float
    gamma3: float

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def blur(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(np.fft.fft2(u) * self.transfer).real

    def blur_adjoint(self, u: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(np.fft.fft2(u) * np.conj(self.transfer)).real

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Apply the operator through the spectrum: ifft(denom * fft(u))."""
        return np.fft.ifft2(np.fft.fft2(u) * self.denom).real


def build_spectral_kernel(
        psf: Psf,
        height: int,
        width: int,
        mu: float,
        gamma1: float,
        gamma3: float) -> SpectralKernel:
    """Precompute the spectrum of (gamma3 A*A - (mu + gamma1) Laplacian)."""

    if not gamma3 > 0:
        raise InvalidParameter('gamma3 must be positive, got %r' % gamma3)
    if not gamma1 > 0:
        raise InvalidParameter('gamma1 must be positive, got %r' % gamma1)
    if mu < 0:
        raise InvalidParameter('mu must be non-negative, got %r' % mu)

    transfer = psf.transfer(height, width)
    gx, gy = _difference_symbols(height, width)
    denom = gamma3 * np.abs(transfer) ** 2 \
        + (mu + gamma1) * (np.abs(gx) ** 2 + np.abs(gy) ** 2)

    for array in (transfer, gx, gy, denom):
        array.setflags(write=False)

    return SpectralKernel(
        height=height,
        width=width,
        transfer=transfer,
        grad_x_symbol=gx,
        grad_y_symbol=gy,
        denom=denom,
        mu=mu,
        gamma1=gamma1,
        gamma3=gamma3)


def apply_u_operator(
        u: np.ndarray,
        psf: Psf,
        mu: float,
        gamma1: float,
        gamma3: float) -> np.ndarray:
    """Apply gamma3 A*A u - (mu + gamma1) Laplacian u in the spatial domain."""
    au = convolve_periodic(u, psf)
    return gamma3 * convolve_periodic_adjoint(au, psf) - (mu + gamma1) * laplacian(u)


def solve_u_system(kernel: SpectralKernel, rhs: np.ndarray) -> np.ndarray:
    """Solve the u-subproblem normal equations exactly by division in frequency."""
    if rhs.shape != kernel.shape:
        raise DimensionMismatch(kernel.shape, rhs.shape)
    return np.fft.ifft2(np.fft.fft2(rhs) / kernel.denom).real
