import os
import tempfile
import unittest

import numpy as np
from PIL import Image

from lpdenoise.exception import GrayscaleRequired, ImageFormatError, InvalidParameter
from lpdenoise.image import ImageGrid, load_image, make_synthetic, open_source, save_image


class TestImageGrid(unittest.TestCase):

    def test_valid_grid(self):
        grid = ImageGrid([[0, 1, 2], [3, 4, 5]])
        self.assertEqual(grid.height, 2)
        self.assertEqual(grid.width, 3)
        self.assertEqual(grid.data.dtype, np.float64)

    def test_rejects_non_finite(self):
        with self.assertRaises(InvalidParameter):
            ImageGrid([[0.0, float('nan')]])

    def test_rejects_empty_and_1d(self):
        with self.assertRaises(InvalidParameter):
            ImageGrid(np.zeros((0, 3)))
        with self.assertRaises(InvalidParameter):
            ImageGrid(np.zeros(4))


class TestImageFiles(unittest.TestCase):

    def setUp(self):
        self._dir = tempfile.TemporaryDirectory()
        self.dir = self._dir.name

    def tearDown(self):
        self._dir.cleanup()

    def path(self, name):
        return os.path.join(self.dir, name)

    def test_load_ascii_pgm(self):
        with open(self.path('a.pgm'), 'w') as f:
            f.write('P2\n# comment\n2 2\n255\n0 64\n128 255\n')
        grid = load_image(self.path('a.pgm'))
        np.testing.assert_array_equal(grid.data, [[0, 64], [128, 255]])

    def test_round_trip_pgm_and_png(self):
        data = np.arange(48, dtype=np.float64).reshape(6, 8) * 5
        for name in ('r.pgm', 'r.png'):
            save_image(ImageGrid(data), self.path(name))
            first = load_image(self.path(name))
            save_image(first, self.path('again_' + name))
            second = load_image(self.path('again_' + name))
            np.testing.assert_array_equal(first.data, data)
            np.testing.assert_array_equal(second.data, data)

    def test_binary_pgm_header(self):
        save_image(ImageGrid(np.zeros((3, 4))), self.path('b.pgm'))
        with open(self.path('b.pgm'), 'rb') as f:
            self.assertEqual(f.read(2), b'P5')

    def test_save_clamps_and_rounds(self):
        grid = ImageGrid([[255.7, -3.0, 127.5, 10.49]])
        save_image(grid, self.path('c.png'))
        np.testing.assert_array_equal(load_image(self.path('c.png')).data, [[255, 0, 128, 10]])

    def test_color_png_rejected(self):
        Image.new('RGB', (4, 4), (10, 20, 30)).save(self.path('color.png'))
        with self.assertRaises(GrayscaleRequired) as ctx:
            load_image(self.path('color.png'))
        self.assertIn('grayscale required', ctx.exception.message)

    def test_missing_and_unsupported(self):
        with self.assertRaises(ImageFormatError):
            load_image(self.path('missing.pgm'))
        with open(self.path('junk.pgm'), 'w') as f:
            f.write('not an image')
        with self.assertRaises(ImageFormatError):
            load_image(self.path('junk.pgm'))
        with self.assertRaises(ImageFormatError):
            save_image(ImageGrid(np.zeros((2, 2))), self.path('out.tiff'))

    def test_unwritable_path(self):
        with self.assertRaises(ImageFormatError):
            save_image(ImageGrid(np.zeros((2, 2))), self.path('no/such/dir/out.pgm'))


class TestSynthetic(unittest.TestCase):

    def test_size_and_range(self):
        grid = make_synthetic(128)
        self.assertEqual(grid.shape, (128, 128))
        self.assertEqual(grid.data.min(), 60)
        self.assertEqual(grid.data.max(), 255)

    def test_four_levels(self):
        for size in (32, 100, 128):
            levels = np.unique(make_synthetic(size).data)
            np.testing.assert_array_equal(levels, [60, 130, 200, 255])

    def test_deterministic(self):
        np.testing.assert_array_equal(make_synthetic(96).data, make_synthetic(96).data)

    def test_too_small(self):
        with self.assertRaises(InvalidParameter):
            make_synthetic(31)

    def test_open_source(self):
        self.assertEqual(open_source('synthetic:64').shape, (64, 64))
        with self.assertRaises(InvalidParameter):
            open_source('synthetic:big')


if __name__ == '__main__':
    unittest.main()
