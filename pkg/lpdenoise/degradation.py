# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

"""Blur followed by Poisson noise.

Poisson samples are drawn with numpy's Philox counter-based bit generator.
Each image row gets its own stream keyed by SeedSequence((seed, row)), so a
degraded image is reproducible bit for bit from (image, spec) alone and rows
can be sampled independently.
"""

from dataclasses import dataclass
import logging
import math
from typing import Optional

import numpy as np

from .consts import DEFAULT_PEAK, DEFAULT_SEED, INTENSITY_MAX, BlurKind
from .exception import InvalidParameter
from .image import ImageGrid
from .operators import Psf, convolve_periodic, make_gaussian_psf, make_motion_psf

_LOGGER = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class BlurSpec:
    """Blur operator description.

    `none`, `motion(length, angle)` or `gaussian(radius, sigma)`.
    """

    kind: BlurKind = BlurKind.NONE
    length: float = 0.0
    angle: float = 0.0
    radius: int = 0
    sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', BlurKind(self.kind))
        # validate eagerly through the PSF constructors
        self.psf()

    @classmethod
    def none(cls) -> 'BlurSpec':
        return cls(BlurKind.NONE)

    @classmethod
    def motion(cls, length: float, angle: float) -> 'BlurSpec':
        return cls(BlurKind.MOTION, length=float(length), angle=float(angle))

    @classmethod
    def gaussian(cls, radius: int, sigma: float) -> 'BlurSpec':
        return cls(BlurKind.GAUSSIAN, radius=int(radius), sigma=float(sigma))

    @classmethod
    def parse(cls, text: str) -> 'BlurSpec':
        """Parse `none`, `motion:LEN:ANGLE` or `gaussian:RADIUS:SIGMA`."""

        parts = [p.strip() for p in text.strip().lower().split(':')]
        try:
            kind = BlurKind(parts[0])
        except ValueError:
            raise InvalidParameter('Unknown blur kind: %s' % text)

        if kind == BlurKind.NONE:
            if len(parts) != 1:
                raise InvalidParameter('Blur "none" takes no parameters: %s' % text)
            return cls.none()

        if len(parts) != 3:
            raise InvalidParameter(
                'Blur must be motion:LEN:ANGLE or gaussian:RADIUS:SIGMA, got %s' % text)
        try:
            if kind == BlurKind.MOTION:
                return cls.motion(float(parts[1]), float(parts[2]))
            radius = float(parts[1])
            if radius != int(radius):
                raise ValueError(parts[1])
            return cls.gaussian(int(radius), float(parts[2]))
        except ValueError:
            raise InvalidParameter('Invalid blur parameters: %s' % text)

    def psf(self) -> Psf:
        if self.kind == BlurKind.MOTION:
            return make_motion_psf(self.length, self.angle)
        elif self.kind == BlurKind.GAUSSIAN:
            return make_gaussian_psf(self.radius, self.sigma)
        return Psf.identity()

    def __str__(self):
        if self.kind == BlurKind.MOTION:
            return 'motion:%g:%g' % (self.length, self.angle)
        elif self.kind == BlurKind.GAUSSIAN:
            return 'gaussian:%d:%g' % (self.radius, self.sigma)
        return 'none'


@dataclass(frozen=True)
class DegradationSpec:
    """Degradation pipeline description.

    `noise_peak` scales intensities to Poisson means (mean = value * peak / 255);
    255 uses pixel values directly as means and `inf` disables noise.
    """

    blur: BlurSpec = BlurSpec()
    noise_peak: float = DEFAULT_PEAK
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.noise_peak > 0:
            raise InvalidParameter('Noise peak must be positive, got %r' % self.noise_peak)

    @property
    def noisy(self) -> bool:
        return not math.isinf(self.noise_peak)


def _row_generator(seed: int, row: int) -> np.random.Generator:
    sequence = np.random.SeedSequence([seed & SEED_MASK, row])
    return np.random.Generator(np.random.Philox(sequence))


def add_poisson_noise(clean: ImageGrid, peak: float, seed: int) -> ImageGrid:
    """Replace every pixel by a scaled Poisson sample with that pixel as mean."""

    if not peak > 0:
        raise InvalidParameter('Noise peak must be positive, got %r' % peak)
    if not clean.is_nonnegative():
        raise InvalidParameter('Poisson noise requires non-negative pixels')

    scale = peak / INTENSITY_MAX
    means = clean.data * scale
    counts = np.empty_like(means)
    for row in range(means.shape[0]):
        counts[row] = _row_generator(seed, row).poisson(means[row])

    return ImageGrid(counts / scale)


def degrade(clean: ImageGrid, spec: DegradationSpec, psf: Optional[Psf] = None) -> ImageGrid:
    """Blur (if any) then add Poisson noise; returns the observed image f."""

    if not clean.is_nonnegative():
        raise InvalidParameter('Degradation requires non-negative pixels')

    if psf is None:
        psf = spec.blur.psf()
    blurred = ImageGrid(np.maximum(convolve_periodic(clean.data, psf), 0.0))

    if not spec.noisy:
        _LOGGER.debug('Degrading with blur %s, no noise', spec.blur)
        return blurred

    _LOGGER.debug('Degrading with blur %s, peak %g, seed %d',
                  spec.blur, spec.noise_peak, spec.seed)
    return add_poisson_noise(blurred, spec.noise_peak, spec.seed)
