# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from .consts import (
    INTENSITY_MAX, MIN_SYNTHETIC_SIZE, SYNTHETIC_BACKGROUND, SYNTHETIC_DISK,
    SYNTHETIC_PREFIX, SYNTHETIC_RECTANGLE, SYNTHETIC_STRIPE
)
from .exception import GrayscaleRequired, ImageFormatError, InvalidParameter

_LOGGER = logging.getLogger(__name__)

COLOR_MODES = ('RGB', 'RGBA', 'RGBX', 'P', 'PA', 'CMYK', 'YCbCr', 'LAB', 'HSV')

SAVE_FORMATS = {
    '.pgm': 'PPM',
    '.png': 'PNG',
}


@dataclass(eq=False)
class ImageGrid:
    """Image grid class.

    This class represents a grayscale image as a float64 array of shape
    (height, width) with nominal intensity range [0, 255].
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise InvalidParameter(
                'Image grid must be two dimensional, got %d dimensions' % data.ndim)
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidParameter('Image grid must not be empty')
        if not np.all(np.isfinite(data)):
            raise InvalidParameter('Image grid contains non-finite values')
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def clamped(self) -> 'ImageGrid':
        """Return a copy clamped to the displayable range [0, 255]."""
        return ImageGrid(np.clip(self.data, 0.0, INTENSITY_MAX))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.data >= 0))


def load_image(path: Union[str, Path]) -> ImageGrid:
    """Load an 8-bit grayscale PGM (P2/P5) or PNG file."""

    try:
        with Image.open(path) as img:
            img.load()
            fmt = img.format
            mode = img.mode
            data = np.asarray(img)
    except FileNotFoundError:
        raise ImageFormatError('File not found: %s' % path)
    except UnidentifiedImageError:
        raise ImageFormatError('Unsupported image format: %s' % path)
    except OSError as ex:
        raise ImageFormatError('Can not read %s: %s' % (path, ex))

    if fmt not in SAVE_FORMATS.values():
        raise ImageFormatError('Unsupported image format %s: %s' % (fmt, path))
    if mode in COLOR_MODES:
        raise GrayscaleRequired(mode)
    if mode != 'L':
        raise ImageFormatError(
            'Only 8-bit grayscale images are supported (got mode %s)' % mode)

    _LOGGER.debug('Loaded %s image %s (%dx%d)', fmt, path, data.shape[1], data.shape[0])
    return ImageGrid(data.astype(np.float64))


def save_image(grid: ImageGrid, path: Union[str, Path]):
    """Save a grid as binary PGM or PNG, chosen by the file extension.

    Values are clamped to [0, 255] and rounded half away from zero.
    """

    fmt = SAVE_FORMATS.get(Path(path).suffix.lower())
    if fmt is None:
        raise ImageFormatError(
            'Unsupported output extension (use .pgm or .png): %s' % path)

    pixels = np.floor(np.clip(grid.data, 0.0, INTENSITY_MAX) + 0.5).astype(np.uint8)
    try:
        Image.fromarray(pixels).save(path, fmt)
    except OSError as ex:
        raise ImageFormatError('Can not write %s: %s' % (path, ex))


def make_synthetic(size: int) -> ImageGrid:
    """Build the piecewise-constant test phantom.

    Background 60, a disk of radius size/5 centred in the upper-left third
    (200), a rectangle inside the lower-right quadrant (130) and a 3 pixel
    wide anti-diagonal stripe (255).
    """

    if size < MIN_SYNTHETIC_SIZE:
        raise InvalidParameter(
            'Synthetic image size must be at least %d, got %d' % (MIN_SYNTHETIC_SIZE, size))

    rows, cols = np.indices((size, size), dtype=np.float64)
    data = np.full((size, size), SYNTHETIC_BACKGROUND)

    center = size / 3.0
    radius = size / 5.0
    data[(rows - center) ** 2 + (cols - center) ** 2 <= radius ** 2] = SYNTHETIC_DISK

    margin = size // 16
    lo, hi = size // 2 + margin, size - margin
    data[lo:hi, lo:hi] = SYNTHETIC_RECTANGLE

    data[np.abs(rows + cols - (size - 1)) <= 1] = SYNTHETIC_STRIPE

    return ImageGrid(data)


def open_source(source: str) -> ImageGrid:
    """Open an image source: a file path or `synthetic:SIZE`."""

    if source.startswith(SYNTHETIC_PREFIX):
        size = source[len(SYNTHETIC_PREFIX):]
        try:
            return make_synthetic(int(size))
        except ValueError:
            raise InvalidParameter('Invalid synthetic image size: %s' % size)
    return load_image(source)


def is_synthetic(source: str) -> bool:
    return source.startswith(SYNTHETIC_PREFIX)
