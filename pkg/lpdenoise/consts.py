# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

from enum import Enum
from typing import Final


class Model(str, Enum):
    """Restoration model enum.

    All three models run through the same augmented Lagrangian loop and
    differ only in the (mu, p) parameterization.
    """
    OUR = 'our'
    L2L1 = 'l2l1'
    TV = 'tv'

    def __str__(self):
        return self.value

    @property
    def label(self) -> str:
        """Row label used in result tables."""
        if self == Model.OUR:
            return 'Our (p = 1/2)'
        elif self == Model.L2L1:
            return 'l2-l1'
        elif self == Model.TV:
            return 'TV'
        else:
            return self.value


class BlurKind(str, Enum):
    """Blur operator kind."""
    NONE = 'none'
    MOTION = 'motion'
    GAUSSIAN = 'gaussian'

    def __str__(self):
        return self.value


class TableFormat(str, Enum):
    """Result table format."""
    MARKDOWN = 'markdown'
    CSV = 'csv'

    def __str__(self):
        return self.value


class OutputFormat(str, Enum):
    """CLI summary output format."""
    TEXT = 'text'
    JSON = 'json'
    JSON_PRETTY = 'json_pretty'

    def __str__(self):
        return self.value


# Solver defaults
DEFAULT_MU: Final = 0.01
DEFAULT_LAMBDA: Final = 6.0
DEFAULT_P: Final = 0.5
DEFAULT_GAMMA1: Final = 0.5
DEFAULT_GAMMA3: Final = 30.0
DEFAULT_TOL: Final = 1e-4
DEFAULT_MAX_ITER: Final = 250
DEFAULT_Z_FLOOR: Final = 1e-8

# Degradation defaults
DEFAULT_PEAK: Final = 255.0
DEFAULT_SEED: Final = 20241120

# Image conventions
INTENSITY_MAX: Final = 255.0
MIN_SYNTHETIC_SIZE: Final = 32
SYNTHETIC_PREFIX: Final = 'synthetic:'
SYNTHETIC_BACKGROUND: Final = 60.0
SYNTHETIC_DISK: Final = 200.0
SYNTHETIC_RECTANGLE: Final = 130.0
SYNTHETIC_STRIPE: Final = 255.0

# SSIM window
SSIM_WINDOW: Final = 11
SSIM_SIGMA: Final = 1.5
SSIM_K1: Final = 0.01
SSIM_K2: Final = 0.03

# Bench table layout
TABLE_COLUMNS: Final = ['Image', 'Model', 'PSNR', 'SNR', 'SSIM', 'Iterations', 'CPU']
TRACE_COLUMNS: Final = ['iter', 'rel_change', 'res_v', 'res_w', 'res_z', 'energy', 'ms']
DEGRADED_LABEL: Final = 'Degraded'
