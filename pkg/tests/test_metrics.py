import math
import unittest

import numpy as np

from lpdenoise.exception import DimensionMismatch, InvalidParameter
from lpdenoise.image import ImageGrid, make_synthetic
from lpdenoise.metrics import QualityReport, evaluate, psnr, snr, ssim, ssim_global


def naive_ssim(x, y, size=11, sigma=1.5):
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    offsets = np.arange(size) - size // 2
    g = np.exp(-offsets ** 2 / (2 * sigma ** 2))
    g /= g.sum()
    weights = np.outer(g, g)
    values = []
    for i in range(x.shape[0] - size + 1):
        for j in range(x.shape[1] - size + 1):
            a = x[i:i + size, j:j + size]
            b = y[i:i + size, j:j + size]
            mu_a = np.sum(weights * a)
            mu_b = np.sum(weights * b)
            var_a = np.sum(weights * a * a) - mu_a * mu_a
            var_b = np.sum(weights * b * b) - mu_b * mu_b
            cov = np.sum(weights * a * b) - mu_a * mu_b
            values.append(((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                          / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
    return float(np.mean(values))


class TestPsnrSnr(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(23)

    def test_off_by_one(self):
        ref = ImageGrid(self.rng.integers(0, 255, (32, 32)))
        self.assertAlmostEqual(psnr(ImageGrid(ref.data + 1), ref), 48.1308, delta=1e-3)
        self.assertAlmostEqual(psnr(ImageGrid(ref.data + 1), ref), 20 * math.log10(255), places=10)

    def test_identical(self):
        ref = make_synthetic(32)
        self.assertEqual(psnr(ref, ref), math.inf)
        self.assertEqual(snr(ref, ref), math.inf)

    def test_symmetric_error(self):
        ref = ImageGrid(self.rng.uniform(20, 230, (16, 16)))
        e = self.rng.uniform(-5, 5, (16, 16))
        self.assertAlmostEqual(psnr(ImageGrid(ref.data + e), ref), psnr(ImageGrid(ref.data - e), ref), places=10)

    def test_monotone(self):
        ref = ImageGrid(self.rng.uniform(20, 230, (16, 16)))
        e = self.rng.uniform(-1, 1, (16, 16))
        self.assertGreater(psnr(ImageGrid(ref.data + e), ref), psnr(ImageGrid(ref.data + 2 * e), ref))

    def test_snr_examples(self):
        ref = ImageGrid(np.full((8, 8), 255.0))
        self.assertAlmostEqual(snr(ImageGrid(np.zeros((8, 8))), ref), 0.0, places=12)
        self.assertAlmostEqual(snr(ImageGrid(np.full((8, 8), 254.0)), ref), 48.1308, delta=1e-3)

    def test_gap_depends_on_reference_only(self):
        ref = ImageGrid(self.rng.uniform(10, 240, (16, 16)))
        a = ImageGrid(ref.data + self.rng.uniform(-3, 3, (16, 16)))
        b = ImageGrid(ref.data + self.rng.uniform(-9, 9, (16, 16)))
        self.assertAlmostEqual(psnr(a, ref) - snr(a, ref), psnr(b, ref) - snr(b, ref), places=9)

    def test_clamps_to_display_range(self):
        ref = ImageGrid(np.full((4, 4), 255.0))
        self.assertEqual(psnr(ImageGrid(np.full((4, 4), 300.0)), ref), math.inf)

    def test_errors(self):
        with self.assertRaises(DimensionMismatch):
            psnr(ImageGrid(np.zeros((4, 4))), ImageGrid(np.zeros((4, 5))))
        with self.assertRaises(InvalidParameter):
            snr(ImageGrid(np.ones((4, 4))), ImageGrid(np.zeros((4, 4))))


class TestSsim(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(29)

    def test_identical_is_one(self):
        img = make_synthetic(64)
        self.assertEqual(ssim(img, img), 1.0)
        self.assertAlmostEqual(ssim(img, img, windowed=False), 1.0, places=12)

    def test_inverted_is_lower(self):
        img = ImageGrid(self.rng.uniform(0, 255, (32, 32)))
        self.assertLess(ssim(ImageGrid(255 - img.data), img), 1.0)

    def test_matches_naive_loop(self):
        for _ in range(3):
            x = self.rng.uniform(0, 255, (32, 32))
            y = np.clip(x + self.rng.normal(0, 20, (32, 32)), 0, 255)
            self.assertAlmostEqual(ssim(ImageGrid(x), ImageGrid(y)), naive_ssim(x, y), delta=1e-10)

    def test_range(self):
        x = ImageGrid(self.rng.uniform(0, 255, (24, 24)))
        y = ImageGrid(self.rng.uniform(0, 255, (24, 24)))
        value = ssim(x, y)
        self.assertGreaterEqual(value, -1.0)
        self.assertLessEqual(value, 1.0)

    def test_global(self):
        x = self.rng.uniform(0, 255, (8, 8))
        y = self.rng.uniform(0, 255, (8, 8))
        mx, my = x.mean(), y.mean()
        cov = np.mean((x - mx) * (y - my))
        c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
        expected = ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx ** 2 + my ** 2 + c1) * (x.var() + y.var() + c2))
        self.assertAlmostEqual(ssim_global(x, y), expected, places=12)
        self.assertAlmostEqual(ssim(ImageGrid(x), ImageGrid(y), windowed=False), expected, places=12)

    def test_too_small_for_window(self):
        img = ImageGrid(np.ones((10, 40)))
        with self.assertRaises(InvalidParameter):
            ssim(img, img)


class TestEvaluate(unittest.TestCase):

    def test_report(self):
        ref = make_synthetic(32)
        u = ImageGrid(ref.data - 1)
        report = evaluate(u, ref, iterations=12, cpu_seconds=0.5)
        self.assertIsInstance(report, QualityReport)
        self.assertAlmostEqual(report.psnr, 48.1308, delta=1e-3)
        self.assertEqual(report.iterations, 12)
        self.assertEqual(report.cpu_seconds, 0.5)
        self.assertLess(report.ssim, 1.0)


if __name__ == '__main__':
    unittest.main()
