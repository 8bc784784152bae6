# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

"""Experiment harness.

Each experiment cell is one image under one degradation, restored by a list
of models that all see the same degraded image. Rows are emitted in spec
order as CSV or as a Markdown table.
"""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, field
import io
import logging
from pathlib import Path
import time
from typing import List, Optional, Sequence, Tuple, Union

from .consts import (
    DEFAULT_PEAK, DEFAULT_SEED, DEGRADED_LABEL, SYNTHETIC_PREFIX, TABLE_COLUMNS,
    Model, TableFormat
)
from .degradation import BlurSpec, DegradationSpec, degrade
from .exception import InvalidParameter, LpDenoiseException, SpecFileError
from .image import ImageGrid, is_synthetic, open_source
from .metrics import QualityReport, evaluate
from .solver import ConvergenceTrace, SolverConfig, run
from .utils import format_float, parse_key_values

_LOGGER = logging.getLogger(__name__)

PRESET_SYNTHETIC_SIZE = 128
IMAGE_EXTENSIONS = ('.pgm', '.png')


@dataclass(frozen=True)
class ModelRun:
    """A labelled solver configuration."""

    label: str
    config: SolverConfig


@dataclass(frozen=True)
class ExperimentSpec:
    """Experiment cell class.

    One image source (file path or `synthetic:SIZE`), one degradation and
    the models compared on it.
    """

    image: str
    degradation: DegradationSpec
    models: Tuple[ModelRun, ...]
    table_format: TableFormat = TableFormat.MARKDOWN
    name: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'models', tuple(self.models))
        if len(self.models) == 0:
            raise InvalidParameter('Experiment needs at least one model')
        labels = [m.label for m in self.models]
        if len(set(labels)) != len(labels):
            raise InvalidParameter('Model labels must be unique: %s' % ', '.join(labels))
        if self.name is None:
            object.__setattr__(self, 'name', image_name(self.image))


@dataclass
class ResultRow:
    """One table row; `report` is None when the row failed."""

    image: str
    model: str
    report: Optional[QualityReport] = None
    error: Optional[str] = None
    trace: Optional[ConvergenceTrace] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.report is not None


def image_name(source: str) -> str:
    if is_synthetic(source):
        return 'Synthetic'
    return Path(source).stem.capitalize()


def standard_models(lam: float, **overrides) -> Tuple[ModelRun, ...]:
    """TV, l2-l1 and p = 1/2 models sharing lambda and any overrides."""
    return tuple(
        ModelRun(m.label, SolverConfig.for_model(m, lam=lam, **overrides))
        for m in (Model.TV, Model.L2L1, Model.OUR))


def _solve_row(spec: ExperimentSpec, model: ModelRun, clean: ImageGrid,
               f: ImageGrid, psf, trace_dir: Optional[Path]) -> ResultRow:
    start = time.perf_counter()
    try:
        restored, trace = run(f, psf, model.config)
        elapsed = time.perf_counter() - start
        report = evaluate(restored, clean, trace.iterations, elapsed)
    except Exception as ex:
        message = ex.message if isinstance(ex, LpDenoiseException) else str(ex)
        _LOGGER.error('%s / %s failed: %s', spec.name, model.label, message)
        return ResultRow(spec.name, model.label, error=message)

    if trace_dir is not None:
        trace.write_csv(trace_dir / trace_file_name(spec.name, model.label))

    return ResultRow(spec.name, model.label, report=report, trace=trace)


def trace_file_name(image: str, label: str) -> str:
    safe = ''.join(c if c.isalnum() else '_' for c in label).strip('_')
    return '%s_%s.csv' % (image.lower(), safe.lower())


def run_experiment(
        spec: ExperimentSpec,
        trace_dir: Union[str, Path, None] = None,
        jobs: int = 1,
        include_degraded: bool = False) -> List[ResultRow]:
    """Degrade the image once and restore it with every model of the experiment."""

    psf = spec.degradation.blur.psf()
    try:
        clean = open_source(spec.image)
        f = degrade(clean, spec.degradation, psf)
    except LpDenoiseException as ex:
        _LOGGER.error('%s: can not prepare image: %s', spec.name, ex.message)
        labels = [m.label for m in spec.models]
        if include_degraded:
            labels.insert(0, DEGRADED_LABEL)
        return [ResultRow(spec.name, label, error=ex.message) for label in labels]

    if trace_dir is not None:
        trace_dir = Path(trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)

    _LOGGER.info('Experiment %s: blur %s, peak %g, seed %d, %d models',
                 spec.name, spec.degradation.blur, spec.degradation.noise_peak,
                 spec.degradation.seed, len(spec.models))

    rows = []
    if include_degraded:
        rows.append(ResultRow(spec.name, DEGRADED_LABEL, report=evaluate(f, clean)))

    def solve(model: ModelRun) -> ResultRow:
        return _solve_row(spec, model, clean, f, psf, trace_dir)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows.extend(pool.map(solve, spec.models))
    else:
        rows.extend(solve(m) for m in spec.models)

    return rows


def _cells(row: ResultRow) -> List[str]:
    if not row.ok:
        return [row.image, row.model, '', '', '', '', '']
    r = row.report
    return [
        row.image,
        row.model,
        format_float(r.psnr, 2),
        format_float(r.snr, 2),
        format_float(r.ssim, 4),
        str(r.iterations),
        format_float(r.cpu_seconds, 2),
    ]


def emit_table(rows: Sequence[ResultRow], fmt: Union[TableFormat, str] = TableFormat.MARKDOWN) -> str:
    """Render rows with fixed column order; PSNR/SNR to 2 decimals, SSIM to 4."""

    fmt = TableFormat(fmt)
    if fmt == TableFormat.CSV:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow(_cells(row))
        return buf.getvalue()

    lines = [
        '| ' + ' | '.join(TABLE_COLUMNS) + ' |',
        '|' + '|'.join(['---'] * len(TABLE_COLUMNS)) + '|',
    ]
    for row in rows:
        lines.append('| ' + ' | '.join(_cells(row)) + ' |')
    failed = [row for row in rows if not row.ok]
    if len(failed) > 0:
        lines.append('')
        for row in failed:
            lines.append('- %s / %s failed: %s' % (row.image, row.model, row.error))
    return '\n'.join(lines) + '\n'


PRESETS = {
    'table1': (BlurSpec.none(), [
        ('synthetic', 6.0, {}),
        ('lena', 7.0, {}),
        ('peppers', 5.0, {}),
    ]),
    'table2': (BlurSpec.motion(10, 90), [
        ('synthetic', 8.0, {}),
        ('lena', 8.0, {}),
        ('peppers', 10.0, {}),
    ]),
    'table3': (BlurSpec.gaussian(3, 3.0), [
        ('synthetic', 8.0, {}),
        ('lena', 6.0, {}),
        ('peppers', 6.0, {'gamma3': 25.0}),
    ]),
}


def find_image(image_dir: Union[str, Path, None], stem: str) -> Optional[Path]:
    if image_dir is None:
        return None
    for ext in IMAGE_EXTENSIONS:
        for candidate in (stem, stem.capitalize(), stem.upper()):
            path = Path(image_dir) / (candidate + ext)
            if path.is_file():
                return path
    return None


def preset(
        name: str,
        image_dir: Union[str, Path, None] = None,
        seed: int = DEFAULT_SEED,
        peak: float = DEFAULT_PEAK,
        table_format: TableFormat = TableFormat.MARKDOWN) -> Tuple[List[ExperimentSpec], List[str]]:
    """Experiment cells of a bundled preset and warnings for skipped images.

    Natural test images are looked up in `image_dir` as <name>.pgm or
    <name>.png; cells whose image is missing are skipped.
    """

    if name not in PRESETS:
        raise InvalidParameter('Unknown preset %s (choose from %s)' % (
            name, ', '.join(sorted(PRESETS))))

    blur, cells = PRESETS[name]
    degradation = DegradationSpec(blur=blur, noise_peak=peak, seed=seed)
    specs = []
    warnings = []
    for stem, lam, overrides in cells:
        if stem == 'synthetic':
            source = SYNTHETIC_PREFIX + str(PRESET_SYNTHETIC_SIZE)
        else:
            path = find_image(image_dir, stem)
            if path is None:
                warnings.append('warning: %s image not found in %s, skipping' % (
                    stem, image_dir if image_dir is not None else '(no --image-dir)'))
                continue
            source = str(path)
        specs.append(ExperimentSpec(
            image=source,
            degradation=degradation,
            models=standard_models(lam, **overrides),
            table_format=table_format,
            name=stem.capitalize()))

    for w in warnings:
        _LOGGER.warning(w)
    return specs, warnings


SPEC_KEYS = ('image', 'blur', 'peak', 'seed', 'models', 'format')


def parse_spec_text(text: str) -> List[ExperimentSpec]:
    """Parse a flat `key = value` experiment spec.

    Keys: image (comma-separated paths or synthetic:SIZE), blur, peak, seed,
    models (comma-separated subset of our, l2l1, tv), format, and any solver
    parameter (lambda, mu, p, gamma1, gamma3, tol, max_iter, z_floor), which
    applies to every model.
    """

    values = {}
    solver = {}
    for lineno, key, value in parse_key_values(text):
        if key is None:
            raise SpecFileError('expected key = value, got %r' % value, lineno)
        if key in SPEC_KEYS:
            values[key] = value
        elif SolverConfig.normalize_key(key) is not None:
            solver[key] = value
        else:
            raise SpecFileError('unknown key %r' % key, lineno)

    if 'image' not in values:
        raise SpecFileError('missing required key "image"')

    try:
        blur = BlurSpec.parse(values.get('blur', 'none'))
        degradation = DegradationSpec(
            blur=blur,
            noise_peak=float(values.get('peak', DEFAULT_PEAK)),
            seed=int(values.get('seed', DEFAULT_SEED)))
        table_format = TableFormat(values.get('format', TableFormat.MARKDOWN.value))
        model_names = [m.strip() for m in values.get('models', 'tv,l2l1,our').split(',')]
        overrides = SolverConfig.coerce(solver)
        models = tuple(
            ModelRun(Model(m).label, SolverConfig.for_model(m, **dict(overrides)))
            for m in model_names)
        return [
            ExperimentSpec(
                image=source.strip(),
                degradation=degradation,
                models=models,
                table_format=table_format)
            for source in values['image'].split(',') if source.strip() != '']
    except SpecFileError:
        raise
    except LpDenoiseException as ex:
        raise SpecFileError(ex.message)
    except ValueError as ex:
        raise SpecFileError(str(ex))


def load_spec_file(path: Union[str, Path]) -> List[ExperimentSpec]:
    try:
        text = Path(path).read_text()
    except OSError as ex:
        raise SpecFileError('can not read %s: %s' % (path, ex))
    return parse_spec_text(text)
