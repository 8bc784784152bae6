import csv
import io
import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np
from click.testing import CliRunner

from lpdenoise.cli import cli
from lpdenoise.exception import NumericFailure
from lpdenoise.image import ImageGrid, load_image, make_synthetic, save_image


def without_cpu(table: str):
    return [row[:-1] for row in csv.reader(io.StringIO(table))]


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.runner = CliRunner()
        self._dir = tempfile.TemporaryDirectory()
        self.dir = self._dir.name

    def tearDown(self):
        self._dir.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def invoke(self, *args):
        return self.runner.invoke(cli, list(args))


class TestSynthAndDegrade(CliTestCase):

    def test_synth(self):
        result = self.invoke('synth', self.path('clean.pgm'), '--size', '64')
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(load_image(self.path('clean.pgm')).shape, (64, 64))

    def test_degrade_reproducible(self):
        save_image(make_synthetic(64), self.path('clean.pgm'))
        for name in ('a.pgm', 'b.pgm'):
            result = self.invoke('degrade', self.path('clean.pgm'), self.path(name),
                                 '--blur', 'motion:10:90', '--seed', '7')
            self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path('a.pgm'), 'rb') as a, open(self.path('b.pgm'), 'rb') as b:
            self.assertEqual(a.read(), b.read())

    def test_bad_blur(self):
        save_image(make_synthetic(64), self.path('clean.pgm'))
        result = self.invoke('degrade', self.path('clean.pgm'), self.path('out.pgm'), '--blur', 'box:3')
        self.assertEqual(result.exit_code, 1)
        self.assertIn('Usage', result.output)

    def test_missing_input(self):
        result = self.invoke('degrade', self.path('missing.pgm'), self.path('out.pgm'))
        self.assertEqual(result.exit_code, 1)
        self.assertIn('File not found', result.output)

    def test_unknown_option(self):
        result = self.invoke('degrade', '--frobnicate')
        self.assertNotEqual(result.exit_code, 0)


class TestDenoise(CliTestCase):

    def setUp(self):
        super().setUp()
        save_image(make_synthetic(64), self.path('clean.pgm'))
        self.invoke('degrade', self.path('clean.pgm'), self.path('noisy.pgm'), '--seed', '3')

    def test_defaults(self):
        result = self.invoke('denoise', self.path('noisy.pgm'), self.path('out.pgm'),
                             '--trace', self.path('trace.csv'))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('iterations=', result.output)
        self.assertEqual(load_image(self.path('out.pgm')).shape, (64, 64))
        with open(self.path('trace.csv')) as f:
            self.assertEqual(f.readline().strip(), 'iter,rel_change,res_v,res_w,res_z,energy,ms')

    def test_invalid_p(self):
        result = self.invoke('denoise', self.path('noisy.pgm'), self.path('out.pgm'), '--p', '1.5')
        self.assertEqual(result.exit_code, 1)
        self.assertIn('p must be in (0,1]', result.output)

    def test_json_summary(self):
        result = self.invoke('--output', 'json', 'denoise', self.path('noisy.pgm'), self.path('out.pgm'),
                             '--model', 'tv', '--max-iter', '5')
        self.assertEqual(result.exit_code, 0, result.output)
        summary = json.loads(result.output.strip().splitlines()[-1])
        self.assertEqual(summary['model'], 'tv')
        self.assertEqual(summary['config']['mu'], 0.0)
        self.assertLessEqual(summary['iterations'], 5)

    def test_numeric_failure_exit_code(self):
        with mock.patch('lpdenoise.cli.run', side_effect=NumericFailure(3, 'z')):
            result = self.invoke('denoise', self.path('noisy.pgm'), self.path('out.pgm'))
        self.assertEqual(result.exit_code, 2)
        self.assertIn('Non-finite z at iteration 3', result.output)

    def test_help_shows_defaults(self):
        result = self.invoke('denoise', '--help')
        self.assertEqual(result.exit_code, 0)
        for text in ('0.01', '30', '0.0001', '250'):
            self.assertIn(text, result.output)


class TestMetrics(CliTestCase):

    def test_identical(self):
        save_image(make_synthetic(64), self.path('a.pgm'))
        result = self.invoke('metrics', self.path('a.pgm'), self.path('a.pgm'))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('PSNR=inf, SNR=inf, SSIM=1.0000', result.output)

    def test_off_by_one(self):
        clean = make_synthetic(64)
        save_image(clean, self.path('a.pgm'))
        save_image(ImageGrid(clean.data - 1), self.path('b.pgm'))
        result = self.invoke('metrics', self.path('b.pgm'), self.path('a.pgm'))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertIn('PSNR=48.13', result.output)

    def test_global_json(self):
        save_image(make_synthetic(64), self.path('a.pgm'))
        result = self.invoke('--output', 'json', 'metrics', '--global', self.path('a.pgm'), self.path('a.pgm'))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(json.loads(result.output.strip().splitlines()[-1])['ssim'], 1.0)

    def test_identical_json_is_strict(self):
        save_image(make_synthetic(64), self.path('a.pgm'))
        result = self.invoke('--output', 'json', 'metrics', self.path('a.pgm'), self.path('a.pgm'))
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertNotIn('Infinity', result.output)
        report = json.loads(result.output.strip().splitlines()[-1])
        self.assertEqual(report['psnr'], 'inf')
        self.assertEqual(report['snr'], 'inf')
        self.assertAlmostEqual(report['ssim'], 1.0)

    def test_size_mismatch(self):
        save_image(make_synthetic(64), self.path('a.pgm'))
        save_image(ImageGrid(np.zeros((32, 64))), self.path('b.pgm'))
        result = self.invoke('metrics', self.path('a.pgm'), self.path('b.pgm'))
        self.assertEqual(result.exit_code, 1)


class TestBench(CliTestCase):

    def test_preset_twice_identical(self):
        tables = []
        for name in ('first.csv', 'second.csv'):
            result = self.invoke('bench', '--preset', 'table1', '--format', 'csv', '-o', self.path(name))
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn('lena image not found', result.output)
            with open(self.path(name)) as f:
                tables.append(f.read())
        self.assertEqual(without_cpu(tables[0]), without_cpu(tables[1]))
        rows = without_cpu(tables[0])
        self.assertEqual(rows[0], ['Image', 'Model', 'PSNR', 'SNR', 'SSIM', 'Iterations'])
        self.assertEqual([r[1] for r in rows[1:]], ['TV', 'l2-l1', 'Our (p = 1/2)'])

    def test_spec_file_to_output(self):
        with open(self.path('exp.txt'), 'w') as f:
            f.write('image = synthetic:32\nmodels = our\nmax_iter = 10\nformat = csv\n')
        result = self.invoke('bench', '--spec', self.path('exp.txt'), '--with-degraded',
                             '--trace-dir', self.path('traces'), '-o', self.path('table.csv'))
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path('table.csv')) as f:
            rows = list(csv.reader(f))
        self.assertEqual([r[1] for r in rows[1:]], ['Degraded', 'Our (p = 1/2)'])
        self.assertEqual(len(os.listdir(self.path('traces'))), 1)

    def test_missing_image_row_fails_others_run(self):
        with open(self.path('exp.txt'), 'w') as f:
            f.write('image = synthetic:32, /nonexistent/lena.pgm\nmodels = our\nmax_iter = 10\nformat = csv\n')
        result = self.invoke('bench', '--spec', self.path('exp.txt'), '-o', self.path('table.csv'))
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path('table.csv')) as f:
            rows = list(csv.reader(f))
        self.assertEqual(len(rows), 3)
        self.assertEqual(rows[1][:2], ['Synthetic', 'Our (p = 1/2)'])
        self.assertNotEqual(rows[1][2], '')
        self.assertEqual(rows[2], ['Lena', 'Our (p = 1/2)', '', '', '', '', ''])

    def test_malformed_spec(self):
        with open(self.path('bad.txt'), 'w') as f:
            f.write('image = synthetic:32\nbogus = 1\n')
        result = self.invoke('bench', '--spec', self.path('bad.txt'))
        self.assertEqual(result.exit_code, 1)
        self.assertIn('line 2', result.output)

    def test_needs_preset_or_spec(self):
        result = self.invoke('bench')
        self.assertEqual(result.exit_code, 1)


if __name__ == '__main__':
    unittest.main()
