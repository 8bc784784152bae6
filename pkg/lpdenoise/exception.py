# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

from typing import Optional, Tuple


class LpDenoiseException(Exception):
    """Exception raised for errors in the lp-denoise library.

    Attributes:
        code -- error code, also used as the CLI exit status
        message -- explanation of the error
    """

    def __init__(self, code, message):
        self.code = code
        self.message = message
        super().__init__(self.message)


class InvalidParameter(LpDenoiseException):
    """Exception raised when a parameter violates its precondition.

    Attributes:
        message -- explanation of the error
    """

    def __init__(self, message):
        self.message = message
        super().__init__(1, self.message)


class DimensionMismatch(LpDenoiseException):
    """Exception raised when two grids must share dimensions but do not."""

    def __init__(self, first: Tuple[int, ...], second: Tuple[int, ...]):
        self.first = tuple(first)
        self.second = tuple(second)
        super().__init__(1, 'Dimension mismatch: %s vs %s' % (
            'x'.join(str(d) for d in self.first),
            'x'.join(str(d) for d in self.second)))


class ImageFormatError(LpDenoiseException):
    """Exception raised when an image file can not be read or written."""

    def __init__(self, message):
        super().__init__(1, message)


class GrayscaleRequired(ImageFormatError):
    """Exception raised when a colour image is given."""

    def __init__(self, mode: Optional[str] = None):
        self.mode = mode
        message = 'grayscale required'
        if mode is not None:
            message += ' (got image mode %s)' % mode
        super().__init__(message)


class SpecFileError(LpDenoiseException):
    """Exception raised for a malformed experiment spec file."""

    def __init__(self, message, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = 'line %d: %s' % (line, message)
        super().__init__(1, message)


class NumericFailure(LpDenoiseException):
    """Exception raised when a solver iterate becomes non-finite.

    Attributes:
        iteration -- iteration index at which the failure was detected
    """

    def __init__(self, iteration: int, what: str):
        self.iteration = iteration
        super().__init__(2, 'Non-finite %s at iteration %d' % (what, iteration))


def check_same_shape(*arrays):
    shape = None
    for a in arrays:
        if shape is None:
            shape = a.shape
        elif a.shape != shape:
            raise DimensionMismatch(shape, a.shape)
