# -----------------------------------------------------------
# Copyright (c) 2024 lp-denoise authors
# SPDX-License-Identifier: MIT
# -----------------------------------------------------------

import click
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

from lpdenoise.bench import emit_table, load_spec_file, preset, run_experiment, PRESETS
from lpdenoise.consts import (
    DEFAULT_GAMMA1, DEFAULT_GAMMA3, DEFAULT_LAMBDA, DEFAULT_MAX_ITER, DEFAULT_MU,
    DEFAULT_P, DEFAULT_PEAK, DEFAULT_SEED, DEFAULT_TOL, BlurKind, Model,
    OutputFormat, TableFormat
)
from lpdenoise.degradation import BlurSpec, DegradationSpec, degrade
from lpdenoise.exception import LpDenoiseException
from lpdenoise.image import load_image, make_synthetic, save_image
from lpdenoise.metrics import evaluate
from lpdenoise.solver import SolverConfig, run
from lpdenoise.utils import format_float

try:
    from rich import print as echo
except ImportError:
    echo = click.echo

BLUR_HELP = ('Blur operator: none, motion:LEN:ANGLE or gaussian:RADIUS:SIGMA. '
             'The experiments use motion:10:90 and gaussian:3:3.')


class EnhancedJSONEncoder(json.JSONEncoder):
    def default(self, o):
        if dataclasses.is_dataclass(o):
            return dataclasses.asdict(o)
        if isinstance(o, (BlurKind, Model)):
            return str(o)
        return super().default(o)


def finite_json(o):
    """Replace infinite floats by "inf"/"-inf" strings; JSON has no infinity."""
    if dataclasses.is_dataclass(o) and not isinstance(o, type):
        o = dataclasses.asdict(o)
    if isinstance(o, dict):
        return {k: finite_json(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [finite_json(v) for v in o]
    if isinstance(o, float) and math.isinf(o):
        return 'inf' if o > 0 else '-inf'
    return o


class GlobalContextObject:
    def __init__(self, debug: int = 0, output: str = OutputFormat.TEXT.value):
        self.debug = debug
        self.output = OutputFormat(output)

    def print(self, result, text: str):
        if self.output == OutputFormat.JSON_PRETTY:
            click.echo(json.dumps(finite_json(result), cls=EnhancedJSONEncoder, indent=4, allow_nan=False))
        elif self.output == OutputFormat.JSON:
            click.echo(json.dumps(finite_json(result), cls=EnhancedJSONEncoder, allow_nan=False))
        else:
            echo(text)


class SafeGroup(click.Group):
    """Click group mapping errors to exit codes.

    0 success, 1 usage or input error, 2 numeric failure.
    """

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, False, **extra)
        except click.exceptions.Abort:
            click.echo('Aborted!', err=True)
            sys.exit(1)
        except click.ClickException as ex:
            ex.show()
            sys.exit(1)
        except LpDenoiseException as ex:
            click.echo('Error: %s' % ex.message, err=True)
            sys.exit(ex.code)
        sys.exit(rv if isinstance(rv, int) else 0)


def parse_blur(ctx, param, value):
    if value is None:
        return BlurSpec.none()
    try:
        return BlurSpec.parse(value)
    except LpDenoiseException as ex:
        raise click.BadParameter(ex.message)


@click.group(cls=SafeGroup)
@click.option('-d', '--debug', is_flag=True, help='Enable debug mode.')
@click.option(
    '--output',
    type=click.Choice([o.value for o in OutputFormat]),
    default=OutputFormat.TEXT.value,
    help='Summary output format. Default: "text"')
@click.pass_context
def cli(ctx: click.Context, debug: int, output: str):
    """Poisson denoising and deblurring with the l2-lp variational model."""
    level = logging.INFO
    if debug > 0:
        level = logging.DEBUG

    logging.basicConfig(level=level)

    ctx.obj = GlobalContextObject(debug=debug, output=output)


def safe_cli():
    cli(prog_name='lp-denoise')


@cli.command()
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--size', default=128, show_default=True, help='Image side in pixels (at least 32).')
@click.pass_context
def synth(ctx: click.Context, out: str, size: int):
    """Write the synthetic piecewise-constant test image."""

    save_image(make_synthetic(size), out)
    ctx.obj.print({'out': out, 'size': size}, 'Wrote %s (%dx%d)' % (out, size, size))


@cli.command('degrade')
@click.argument('src', type=click.Path(dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--blur', callback=parse_blur, default='none', help=BLUR_HELP + ' Default: none')
@click.option('--peak', type=float, default=DEFAULT_PEAK,
              help='Poisson peak; 255 uses pixel values as means. Default: %g' % DEFAULT_PEAK)
@click.option('--seed', type=int, default=DEFAULT_SEED, help='Noise seed. Default: %d' % DEFAULT_SEED)
@click.pass_context
def cmd_degrade(ctx: click.Context, src: str, out: str, blur: BlurSpec, peak: float, seed: int):
    """Blur an image and add Poisson noise."""

    clean = load_image(src)
    spec = DegradationSpec(blur=blur, noise_peak=peak, seed=seed)
    f = degrade(clean, spec)
    save_image(f, out)

    ctx.obj.print(
        {'out': out, 'blur': str(blur), 'peak': peak, 'seed': seed},
        'Wrote %s (blur %s, peak %g, seed %d)' % (out, blur, peak, seed))


@cli.command('denoise')
@click.argument('src', type=click.Path(dir_okay=False))
@click.argument('out', type=click.Path(dir_okay=False))
@click.option('--model', type=click.Choice([m.value for m in Model]), default=Model.OUR.value,
              help='our: l2-lp model; l2l1: p = 1; tv: mu = 0, p = 1. Default: our')
@click.option('--mu', type=float, default=None, help='Smoothness weight mu. Default: %g' % DEFAULT_MU)
@click.option('--lambda', 'lam', type=float, default=None,
              help='Fidelity weight lambda. Default: %g' % DEFAULT_LAMBDA)
@click.option('--p', type=float, default=None, help='Shrinkage exponent in (0,1]. Default: %g' % DEFAULT_P)
@click.option('--gamma1', type=float, default=None,
              help='Penalty gamma1 = gamma2. Default: %g' % DEFAULT_GAMMA1)
@click.option('--gamma3', type=float, default=None, help='Penalty gamma3. Default: %g' % DEFAULT_GAMMA3)
@click.option('--tol', type=float, default=None,
              help='Relative change stopping tolerance. Default: %g' % DEFAULT_TOL)
@click.option('--max-iter', type=int, default=None,
              help='Iteration cap. Default: %d' % DEFAULT_MAX_ITER)
@click.option('--blur', callback=parse_blur, default='none',
              help=BLUR_HELP + ' Must match the degradation. Default: none')
@click.option('--trace', type=click.Path(dir_okay=False), default=None,
              help='Write the convergence trace CSV to this file.')
@click.pass_context
def cmd_denoise(ctx: click.Context, src: str, out: str, model: str, mu: float, lam: float,
                p: float, gamma1: float, gamma3: float, tol: float, max_iter: int,
                blur: BlurSpec, trace: str):
    """Restore a blurred, Poisson-noisy image."""

    overrides = {
        'mu': mu, 'lam': lam, 'p': p, 'gamma1': gamma1, 'gamma3': gamma3,
        'eps_tol': tol, 'max_iter': max_iter,
    }
    cfg = SolverConfig.for_model(model, **{k: v for k, v in overrides.items() if v is not None})
    f = load_image(src)

    restored, conv = run(f, blur, cfg)
    save_image(restored, out)
    if trace is not None:
        conv.write_csv(trace)

    summary = {
        'out': out,
        'model': model,
        'config': cfg,
        'iterations': conv.iterations,
        'rel_change': conv.last.rel_change,
        'converged': conv.converged,
    }
    ctx.obj.print(summary, 'iterations=%d rel_change=%.3e%s' % (
        conv.iterations, conv.last.rel_change, '' if conv.converged else ' (iteration cap)'))


@cli.command('metrics')
@click.argument('restored', type=click.Path(dir_okay=False))
@click.argument('reference', type=click.Path(dir_okay=False))
@click.option('--global', 'global_ssim', is_flag=True,
              help='Use the single-window global SSIM instead of the 11x11 windowed SSIM.')
@click.pass_context
def cmd_metrics(ctx: click.Context, restored: str, reference: str, global_ssim: bool):
    """Compare a restored image with the clean reference."""

    report = evaluate(load_image(restored), load_image(reference), windowed=not global_ssim)
    ctx.obj.print(report, 'PSNR=%s, SNR=%s, SSIM=%s' % (
        format_float(report.psnr, 2),
        format_float(report.snr, 2),
        format_float(report.ssim, 4)))


@cli.command('bench')
@click.option('--preset', 'preset_name', type=click.Choice(sorted(PRESETS)), default=None,
              help='Bundled experiment: table1 (Poisson noise), table2 (motion blur 10/90), '
                   'table3 (Gaussian blur radius 3, sigma 3). Models use mu=%g, gamma1=gamma2=%g, '
                   'gamma3=%g, tol=%g, max_iter=%d, p=%g.' % (
                       DEFAULT_MU, DEFAULT_GAMMA1, DEFAULT_GAMMA3, DEFAULT_TOL,
                       DEFAULT_MAX_ITER, DEFAULT_P))
@click.option('--spec', 'spec_file', type=click.Path(dir_okay=False), default=None,
              help='Experiment spec file of "key = value" lines: image (comma-separated paths or '
                   'synthetic:SIZE), blur, peak, seed, models (our,l2l1,tv), format, and solver '
                   'keys (lambda, mu, p, gamma1, gamma3, tol, max_iter).')
@click.option('--format', 'table_format', type=click.Choice([t.value for t in TableFormat]),
              default=None, help='Table format. Default: markdown')
@click.option('--trace-dir', type=click.Path(file_okay=False), default=None,
              help='Write one convergence trace CSV per image and model here.')
@click.option('--image-dir', type=click.Path(file_okay=False), default=None,
              help='Directory holding lena and peppers images (.pgm or .png) for the presets.')
@click.option('--seed', type=int, default=None, help='Noise seed for presets. Default: %d' % DEFAULT_SEED)
@click.option('--jobs', type=int, default=1, show_default=True, help='Models solved in parallel per image.')
@click.option('--with-degraded', is_flag=True, help='Add a row with the metrics of the degraded input.')
@click.option('-o', '--out', 'out_file', type=click.Path(dir_okay=False), default=None,
              help='Write the table to this file instead of stdout.')
def cmd_bench(preset_name: str, spec_file: str, table_format: str, trace_dir: str,
              image_dir: str, seed: int, jobs: int, with_degraded: bool, out_file: str):
    """Run an experiment table."""

    if (preset_name is None) == (spec_file is None):
        raise click.UsageError('Give exactly one of --preset or --spec.')

    if preset_name is not None:
        specs, warnings = preset(
            preset_name, image_dir=image_dir, seed=seed if seed is not None else DEFAULT_SEED)
        for w in warnings:
            click.echo(w, err=True)
    else:
        specs = load_spec_file(spec_file)

    if table_format is None:
        table_format = specs[0].table_format if len(specs) > 0 else TableFormat.MARKDOWN

    rows = []
    for spec in specs:
        rows.extend(run_experiment(
            spec, trace_dir=trace_dir, jobs=jobs, include_degraded=with_degraded))

    text = emit_table(rows, table_format)
    if out_file is not None:
        Path(out_file).write_text(text)
    else:
        click.echo(text, nl=False)
