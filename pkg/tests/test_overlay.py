"""Overlay rendering: exact blend arithmetic and untouched-pixel guarantees."""

import numpy as np
import pytest

from roofmask import Box, Detection, MaskPatch
from roofmask.overlay import render_overlay


def checkered_image(h, w, seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


class TestRenderOverlay:
    def test_no_detections_is_identity(self):
        image = checkered_image(20, 30)
        out = render_overlay(image, [])
        assert (out == image).all()
        assert out is not image

    def test_maskless_detection_touches_only_perimeter(self):
        image = checkered_image(20, 20)
        det = Detection(Box(4, 5, 14, 15), 0.9)
        out = render_overlay(image, [det])
        diff = np.any(out != image, axis=2)
        ys, xs = np.nonzero(diff)
        assert len(xs) > 0
        # all changed pixels lie on the 2px border ring of the box
        inside_outer = (xs >= 4) & (xs < 14) & (ys >= 5) & (ys < 15)
        inside_inner = (xs >= 6) & (xs < 12) & (ys >= 7) & (ys < 13)
        assert inside_outer.all()
        assert not inside_inner.any()
        assert (out[diff] == np.array([0, 0, 255], dtype=np.uint8)).all()

    def test_blend_arithmetic_exact(self):
        image = np.full((10, 10, 3), 100, dtype=np.uint8)
        bits = np.zeros((10, 10), dtype=bool)
        bits[5, 5] = True
        det = Detection(Box(0, 0, 1, 1), 0.5, mask=MaskPatch(0, 0, bits))
        out = render_overlay(image, [det])
        want = np.rint(0.55 * 100 + 0.45 * np.array([255, 255, 0])).astype(np.uint8)
        assert (out[5, 5] == want).all()

    def test_blend_applies_once_for_overlapping_masks(self):
        image = np.full((8, 8, 3), 40, dtype=np.uint8)
        bits = np.zeros((8, 8), dtype=bool)
        bits[6, 6] = True
        dets = [
            Detection(Box(0, 0, 1, 1), 0.5, mask=MaskPatch(0, 0, bits)),
            Detection(Box(1, 1, 2, 2), 0.6, mask=MaskPatch(0, 0, bits.copy())),
        ]
        out = render_overlay(image, dets)
        want = np.rint(0.55 * 40 + 0.45 * np.array([255, 255, 0])).astype(np.uint8)
        assert (out[6, 6] == want).all()

    def test_untouched_pixels_bit_identical(self):
        rng = np.random.default_rng(1)
        image = checkered_image(40, 40, seed=2)
        bits = rng.uniform(size=(40, 40)) < 0.1
        dets = [
            Detection(Box(5, 5, 15, 18), 0.8, mask=MaskPatch(0, 0, bits)),
            Detection(Box(20, 22, 33, 30), 0.7),
        ]
        out = render_overlay(image, dets)
        touched = bits.copy()
        for det in dets:
            x0, y0, x1, y1 = (int(v) for v in det.box.as_tuple())
            ring = np.zeros((40, 40), dtype=bool)
            ring[y0:y1, x0:x1] = True
            ring[y0 + 2 : y1 - 2, x0 + 2 : x1 - 2] = False
            touched |= ring
        unchanged = np.all(out == image, axis=2)
        assert unchanged[~touched].all()

    def test_out_of_bounds_geometry_clipped(self):
        image = checkered_image(10, 10)
        det = Detection(Box(-5, -5, 30, 30), 0.9)
        out = render_overlay(image, [det])  # no exception, edges painted
        assert (out[0, :] == np.array([0, 0, 255])).all()

    def test_rejects_non_rgb(self):
        from roofmask import InvalidArgumentError

        with pytest.raises(InvalidArgumentError):
            render_overlay(np.zeros((5, 5), dtype=np.uint8), [])
