# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

"""Augmented Lagrangian solver for the l2-lp Poisson restoration model.

Minimizes

    mu/2 |grad u|^2 + |grad u|_p^p + lambda <1, A u - f log A u>

with the splitting v = Dx u, w = Dy u, z = A u. One iteration updates u
(exact FFT solve), then (v, w) by p-shrinkage, then z by the positive root
of a per-pixel quadratic, then the three multipliers.
"""

import csv
from dataclasses import dataclass, field, fields, replace
import io
import logging
import math
from typing import Any, List, Mapping, Optional, Tuple, Union

import numpy as np

from .consts import (
    DEFAULT_GAMMA1, DEFAULT_GAMMA3, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, DEFAULT_MU,
    DEFAULT_P, DEFAULT_TOL, DEFAULT_Z_FLOOR, TRACE_COLUMNS, Model
)
from .degradation import BlurSpec
from .exception import InvalidParameter, NumericFailure, SpecFileError, check_same_shape
from .image import ImageGrid
from .operators import (
    Psf, SpectralKernel, build_spectral_kernel, convolve_periodic,
    grad_x, grad_x_adjoint, grad_y, grad_y_adjoint, solve_u_system
)
from .utils import get_timestamp_ms, snake_case

_LOGGER = logging.getLogger(__name__)

CONFIG_ALIASES = {
    'lambda': 'lam',
    'lambda_': 'lam',
    'tol': 'eps_tol',
    'eps': 'eps_tol',
    'max_iterations': 'max_iter',
    'maxiter': 'max_iter',
}


@dataclass(frozen=True)
class SolverConfig:
    """Solver configuration class.

    Scalar knobs of the model and of the iteration. `gamma2` defaults to
    `gamma1` and must equal it: the u-solve relies on gamma1 = gamma2.
    """

    mu: float = DEFAULT_MU
    lam: float = DEFAULT_LAMBDA
    p: float = DEFAULT_P
    gamma1: float = DEFAULT_GAMMA1
    gamma2: Optional[float] = None
    gamma3: float = DEFAULT_GAMMA3
    eps_tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    z_floor: float = DEFAULT_Z_FLOOR

    def __post_init__(self):
        if self.gamma2 is None:
            object.__setattr__(self, 'gamma2', self.gamma1)

        if not 0 < self.p <= 1:
            raise InvalidParameter('p must be in (0,1], got %r' % self.p)
        if not self.lam > 0:
            raise InvalidParameter('lambda must be positive, got %r' % self.lam)
        if not self.gamma1 > 0:
            raise InvalidParameter('gamma1 must be positive, got %r' % self.gamma1)
        if self.gamma2 != self.gamma1:
            raise InvalidParameter(
                'gamma2 must equal gamma1, got %r and %r' % (self.gamma2, self.gamma1))
        if not self.gamma3 > 0:
            raise InvalidParameter('gamma3 must be positive, got %r' % self.gamma3)
        if not self.mu >= 0:
            raise InvalidParameter('mu must be non-negative, got %r' % self.mu)
        if not self.eps_tol > 0:
            raise InvalidParameter('tolerance must be positive, got %r' % self.eps_tol)
        if self.max_iter < 1:
            raise InvalidParameter('max_iter must be at least 1, got %r' % self.max_iter)
        if not self.z_floor > 0:
            raise InvalidParameter('z_floor must be positive, got %r' % self.z_floor)

    @classmethod
    def for_model(cls, model: Union[Model, str], **overrides) -> 'SolverConfig':
        """Configuration of one of the three models.

        `tv` fixes mu = 0 and p = 1, `l2l1` fixes p = 1; other values come
        from the defaults or `overrides`.
        """
        model = Model(model)
        if model == Model.TV:
            overrides['mu'] = 0.0
            overrides['p'] = 1.0
        elif model == Model.L2L1:
            overrides['p'] = 1.0
        return cls(**overrides)

    @classmethod
    def normalize_key(cls, key: str) -> Optional[str]:
        key = snake_case(key)
        key = CONFIG_ALIASES.get(key, key)
        names = set([f.name for f in fields(cls)])
        if key in names:
            return key
        return None

    @classmethod
    def coerce(cls, mapping: Mapping[str, Any]) -> dict:
        """Map loosely spelled keys and string values onto field names and types."""
        kwargs = {}
        for k, v in mapping.items():
            name = cls.normalize_key(k)
            if name is None:
                raise SpecFileError('Unknown solver parameter: %s' % k)
            try:
                kwargs[name] = int(v) if name == 'max_iter' else float(v)
            except (TypeError, ValueError):
                raise SpecFileError('Invalid value for %s: %r' % (k, v))
        return kwargs

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Any]) -> 'SolverConfig':
        return cls(**cls.coerce(mapping))

    def with_overrides(self, **overrides) -> 'SolverConfig':
        if 'gamma1' in overrides and 'gamma2' not in overrides:
            overrides['gamma2'] = overrides['gamma1']
        return replace(self, **overrides)


@dataclass
class SolverState:
    """Iterates of the augmented Lagrangian method."""

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    z: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray
    iteration: int = 0

    @property
    def shape(self) -> Tuple[int, int]:
        return self.u.shape


@dataclass
class IterationRecord:
    """Diagnostics of one completed iteration.

    `ms` is wall time elapsed since the start of the run; `dlam` is the
    summed norm of the three multiplier changes.
    """

    iteration: int
    rel_change: float
    res_v: float
    res_w: float
    res_z: float
    energy: float
    ms: float
    dlam: float = 0.0

    def row(self) -> List[Any]:
        return [self.iteration, repr(self.rel_change), repr(self.res_v),
                repr(self.res_w), repr(self.res_z), repr(self.energy),
                '%.3f' % self.ms]


@dataclass
class ConvergenceTrace:
    """Convergence trace class.

    One record per completed iteration plus the unclamped final iterate.
    """

    records: List[IterationRecord] = field(default_factory=list)
    converged: bool = False
    final_u: Optional[np.ndarray] = None

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def last(self) -> Optional[IterationRecord]:
        if len(self.records) == 0:
            return None
        return self.records[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(TRACE_COLUMNS)
        for record in self.records:
            writer.writerow(record.row())
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, 'w', newline='') as f:
            f.write(self.to_csv())


def init_state(f: ImageGrid, kernel: SpectralKernel, psf: Psf, cfg: SolverConfig) -> SolverState:
    """Warm start: u = f, v, w its gradients, z = max(A f, z_floor), zero multipliers."""

    if not f.is_nonnegative():
        raise InvalidParameter('Observed image must be non-negative')
    if f.shape != kernel.shape:
        raise InvalidParameter(
            'Spectral kernel built for %dx%d, image is %dx%d' % (kernel.shape + f.shape))

    u = f.data.copy()
    zeros = np.zeros_like(u)
    return SolverState(
        u=u,
        v=grad_x(u),
        w=grad_y(u),
        z=np.maximum(convolve_periodic(u, psf), cfg.z_floor),
        lam1=zeros,
        lam2=zeros.copy(),
        lam3=zeros.copy())


def update_u(state: SolverState, f: np.ndarray, kernel: SpectralKernel, cfg: SolverConfig) -> np.ndarray:
    """Exact minimizer of the u-subproblem from v, w, z and multipliers of the previous step."""

    rhs = cfg.gamma1 * grad_x_adjoint(state.v - state.lam1 / cfg.gamma1) \
        + cfg.gamma2 * grad_y_adjoint(state.w - state.lam2 / cfg.gamma2) \
        + cfg.gamma3 * kernel.blur_adjoint(state.z - state.lam3 / cfg.gamma3)
    return solve_u_system(kernel, rhs)


def shrink_p(rx: np.ndarray, ry: np.ndarray, gamma: float, p: float) -> Tuple[np.ndarray, np.ndarray]:
    """Isotropic p-shrinkage of the vector field (rx, ry).

    Magnitude max(r - gamma^(p-2) r^(p-1), 0) along the direction of
    (rx, ry); zero where r = 0.
    """

    r = np.sqrt(rx ** 2 + ry ** 2)
    nonzero = r > 0
    safe_r = np.where(nonzero, r, 1.0)
    magnitude = np.maximum(safe_r - gamma ** (p - 2.0) * safe_r ** (p - 1.0), 0.0)
    scale = np.where(nonzero, magnitude / safe_r, 0.0)
    return scale * rx, scale * ry


def update_vw(state: SolverState, u_next: np.ndarray, cfg: SolverConfig) -> Tuple[np.ndarray, np.ndarray]:
    rx = grad_x(u_next) + state.lam1 / cfg.gamma1
    ry = grad_y(u_next) + state.lam2 / cfg.gamma2
    return shrink_p(rx, ry, cfg.gamma1, cfg.p)


def update_z(state: SolverState, u_next: np.ndarray, f: np.ndarray, psf: Psf, cfg: SolverConfig) -> np.ndarray:
    """Positive root of z^2 - b z - (lambda/gamma3) f = 0, floored at z_floor.

    b = A u + lambda3/gamma3 - lambda/gamma3. For b < 0 the root is taken
    in the cancellation-free form 2q / (sqrt(b^2 + 4q) - b).
    """

    if np.any(f < 0):
        raise InvalidParameter('Observed image must be non-negative')

    b = convolve_periodic(u_next, psf) + state.lam3 / cfg.gamma3 - cfg.lam / cfg.gamma3
    q = cfg.lam * f / cfg.gamma3
    root = np.sqrt(b ** 2 + 4.0 * q)
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(b >= 0, 0.5 * (b + root), 2.0 * q / (root - b))
    return np.maximum(z, cfg.z_floor)


def update_multipliers(
        state: SolverState,
        u_next: np.ndarray,
        v_next: np.ndarray,
        w_next: np.ndarray,
        z_next: np.ndarray,
        psf: Psf,
        cfg: SolverConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    check_same_shape(state.u, u_next, v_next, w_next, z_next)
    lam1 = state.lam1 + cfg.gamma1 * (grad_x(u_next) - v_next)
    lam2 = state.lam2 + cfg.gamma2 * (grad_y(u_next) - w_next)
    lam3 = state.lam3 + cfg.gamma3 * (convolve_periodic(u_next, psf) - z_next)
    return lam1, lam2, lam3


def relative_change(u_prev: np.ndarray, u_next: np.ndarray) -> float:
    """||u_next - u_prev|| / ||u_prev||."""
    check_same_shape(u_prev, u_next)
    norm = np.linalg.norm(u_prev)
    if norm == 0:
        raise InvalidParameter('Relative change undefined for a zero iterate')
    return float(np.linalg.norm(u_next - u_prev) / norm)


def iterate_change(u_prev: np.ndarray, u_next: np.ndarray) -> float:
    """Relative change, or the absolute change ||u_next - u_prev|| from a zero iterate."""
    if not np.any(u_prev):
        check_same_shape(u_prev, u_next)
        return float(np.linalg.norm(u_next - u_prev))
    return relative_change(u_prev, u_next)


def energy(u: np.ndarray, f: np.ndarray, psf: Psf, cfg: SolverConfig) -> float:
    """Objective of the model evaluated at u; A u is floored at z_floor before the log."""

    gx = grad_x(u)
    gy = grad_y(u)
    squared = gx ** 2 + gy ** 2
    au = np.maximum(convolve_periodic(u, psf), cfg.z_floor)
    return float(0.5 * cfg.mu * np.sum(squared)
                 + np.sum(np.sqrt(squared) ** cfg.p)
                 + cfg.lam * np.sum(au - f * np.log(au)))


def _check_finite(iteration: int, **arrays):
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            raise NumericFailure(iteration, name)


def run(
        f: ImageGrid,
        blur: Union[BlurSpec, Psf, None],
        cfg: SolverConfig) -> Tuple[ImageGrid, ConvergenceTrace]:
    """Restore f. Returns the result clamped to [0, 255] and the trace."""

    if blur is None:
        psf = Psf.identity()
    elif isinstance(blur, Psf):
        psf = blur
    else:
        psf = blur.psf()

    fdata = f.data
    kernel = build_spectral_kernel(psf, f.height, f.width, cfg.mu, cfg.gamma1, cfg.gamma3)
    state = init_state(f, kernel, psf, cfg)
    trace = ConvergenceTrace()

    _LOGGER.info('Solving %dx%d: mu=%g lambda=%g p=%g gamma1=%g gamma3=%g tol=%g max_iter=%d',
                 f.height, f.width, cfg.mu, cfg.lam, cfg.p, cfg.gamma1, cfg.gamma3,
                 cfg.eps_tol, cfg.max_iter)

    start = get_timestamp_ms()
    for k in range(1, cfg.max_iter + 1):
        u_next = update_u(state, fdata, kernel, cfg)
        v_next, w_next = update_vw(state, u_next, cfg)
        z_next = update_z(state, u_next, fdata, psf, cfg)
        lam1, lam2, lam3 = update_multipliers(state, u_next, v_next, w_next, z_next, psf, cfg)
        _check_finite(k, u=u_next, v=v_next, w=w_next, z=z_next,
                      lambda1=lam1, lambda2=lam2, lambda3=lam3)

        rel = iterate_change(state.u, u_next)
        au = convolve_periodic(u_next, psf)
        record = IterationRecord(
            iteration=k,
            rel_change=rel,
            res_v=float(np.linalg.norm(v_next - grad_x(u_next))),
            res_w=float(np.linalg.norm(w_next - grad_y(u_next))),
            res_z=float(np.linalg.norm(z_next - au)),
            energy=energy(u_next, fdata, psf, cfg),
            ms=get_timestamp_ms() - start,
            dlam=float(np.linalg.norm(lam1 - state.lam1)
                       + np.linalg.norm(lam2 - state.lam2)
                       + np.linalg.norm(lam3 - state.lam3)))
        if not math.isfinite(record.energy):
            raise NumericFailure(k, 'energy')
        trace.records.append(record)

        _LOGGER.debug('iter %d: rel_change=%.3e res_v=%.3e res_w=%.3e res_z=%.3e energy=%.6e',
                      k, rel, record.res_v, record.res_w, record.res_z, record.energy)

        state = SolverState(u_next, v_next, w_next, z_next, lam1, lam2, lam3, k)
        if rel <= cfg.eps_tol:
            trace.converged = True
            break

    trace.final_u = state.u
    if trace.converged:
        _LOGGER.info('Converged after %d iterations (rel_change %.3e)',
                     trace.iterations, trace.last.rel_change)
    else:
        _LOGGER.info('Stopped at iteration cap %d (rel_change %.3e)',
                     trace.iterations, trace.last.rel_change)

    return ImageGrid(state.u).clamped(), trace
