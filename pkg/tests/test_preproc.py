"""Grayscale, profiles, baseline and rule erasure, and line segmentation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coldscript import contour, preproc
from coldscript.errors import ConfigError, InvalidInputError


class TestToGrayscale:
    def test_luma_weights(self):
        img = np.zeros((1, 3, 3), dtype=np.uint8)
        img[0, 0] = (255, 0, 0)
        img[0, 1] = (0, 255, 0)
        img[0, 2] = (0, 0, 255)
        gray = preproc.to_grayscale(img)
        assert gray.tolist() == [[76, 150, 29]]

    def test_white_stays_white(self):
        img = np.full((4, 4, 3), 255, dtype=np.uint8)
        assert (preproc.to_grayscale(img) == 255).all()

    def test_shape_validation(self):
        with pytest.raises(InvalidInputError):
            preproc.to_grayscale(np.zeros((4, 4), dtype=np.uint8))
        with pytest.raises(InvalidInputError):
            preproc.to_grayscale(np.zeros((0, 4, 3), dtype=np.uint8))


class TestInkProfile:
    def test_rows_scored_by_inverted_mean(self):
        img = np.full((3, 10), 255, dtype=np.uint8)
        img[1] = 0
        img[2, :5] = 55
        profile = preproc.ink_profile(img)
        assert profile.tolist() == [0.0, 255.0, 100.0]

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            preproc.ink_profile(np.zeros((0, 4), dtype=np.uint8))
        with pytest.raises(InvalidInputError):
            preproc.ink_profile(np.zeros((2, 2, 3), dtype=np.uint8))


class TestTangents:
    def _edge_map(self, points, shape=(10, 10)):
        m = np.zeros(shape, dtype=bool)
        for x, y in points:
            m[y, x] = True
        return m

    def test_successor_angles(self):
        m = self._edge_map([(2, 2), (3, 2)])
        assert preproc.contour_tangent(m, (2, 2)) == 0.0
        m = self._edge_map([(2, 2), (2, 3)])
        assert preproc.contour_tangent(m, (2, 2)) == 90.0
        m = self._edge_map([(2, 2), (3, 3)])
        assert preproc.contour_tangent(m, (2, 2)) == 45.0

    def test_isolated_pixel_returns_none(self):
        m = self._edge_map([(5, 5)])
        assert preproc.contour_tangent(m, (5, 5)) is None

    def test_non_edge_pixel_rejected(self):
        m = self._edge_map([(5, 5)])
        with pytest.raises(InvalidInputError):
            preproc.contour_tangent(m, (0, 0))

    def test_field_matches_pointwise_tangent(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            edges = rng.random((15, 15)) < 0.3
            field = preproc.tangent_field(edges)
            for y, x in np.argwhere(edges):
                expected = preproc.contour_tangent(edges, (int(x), int(y)))
                if expected is None:
                    assert np.isnan(field[y, x])
                else:
                    assert field[y, x] == expected
            assert np.isnan(field[~edges]).all()


def _page_with_rule(rule_row=60, bar_cols=(100, 102), bar_rows=(30, 90)):
    img = np.full((200, 300), 255, dtype=np.uint8)
    img[bar_rows[0]:bar_rows[1], bar_cols[0]:bar_cols[1]] = 0
    img[rule_row, :] = 0
    return img


class TestRemoveBaselines:
    def _clean(self, img, **kw):
        edges = contour.canny_edges(img)
        return preproc.remove_baselines(img, edges, preproc.ink_profile(img), **kw)

    def test_rule_row_blanked_strokes_kept(self):
        img = _page_with_rule()
        cleaned = self._clean(img)
        assert (cleaned[60] == 255).all()
        # The crossing stroke survives everywhere off the rule row's reach.
        assert (cleaned[30:57, 100:102] == 0).all()
        assert (cleaned[64:90, 100:102] == 0).all()

    def test_unruled_page_untouched(self):
        img = _page_with_rule()
        img[60, :] = 255  # drop the rule, keep the stroke
        assert np.array_equal(self._clean(img), img)

    def test_ink_never_increases(self):
        img = _page_with_rule()
        cleaned = self._clean(img)
        assert (cleaned.astype(int) >= img.astype(int)).all()

    def test_solid_block_interior_preserved(self):
        # Rows deep inside a filled region have no edge support in reach and
        # must not be mistaken for rules.
        img = np.full((60, 100), 255, dtype=np.uint8)
        img[20:40, :] = 0
        cleaned = self._clean(img)
        assert (cleaned[25:35] == 0).all()

    def test_parameter_validation(self):
        img = _page_with_rule()
        edges = contour.canny_edges(img)
        profile = preproc.ink_profile(img)
        with pytest.raises(ConfigError):
            preproc.remove_baselines(img, edges, profile, hpp_thresh=300)
        with pytest.raises(ConfigError):
            preproc.remove_baselines(img, edges, profile, angle_thresh=91)
        with pytest.raises(InvalidInputError):
            preproc.remove_baselines(img, edges[:-1], profile)
        with pytest.raises(InvalidInputError):
            preproc.remove_baselines(img, edges, profile[:-1])


class TestRemoveRuleLines:
    def _line(self, img, y0=0):
        return preproc.TextLine(y_start=y0, y_end=y0 + img.shape[0], crop=img)

    def test_rule_erased_text_kept(self):
        crop = np.full((40, 300), 255, dtype=np.uint8)
        crop[10:30, 50:52] = 0
        crop[20, 5:295] = 0
        line = self._line(crop)
        cleared = preproc.remove_rule_lines(line, contour.canny_edges(crop))
        rule_cells = crop[20] == 0
        assert (cleared.crop[20, rule_cells] == 255).mean() >= 0.95
        assert (cleared.crop[10:17, 50:52] == 0).all()
        assert (cleared.crop[24:30, 50:52] == 0).all()

    def test_unruled_line_unchanged(self):
        crop = np.full((40, 300), 255, dtype=np.uint8)
        crop[10:30, 50:52] = 0
        line = self._line(crop)
        cleared = preproc.remove_rule_lines(line, contour.canny_edges(crop))
        assert np.array_equal(cleared.crop, crop)
        assert cleared.crop is not crop

    def test_rule_only_crop_nearly_emptied(self):
        crop = np.full((30, 300), 255, dtype=np.uint8)
        crop[15, 5:295] = 0
        line = self._line(crop)
        cleared = preproc.remove_rule_lines(line, contour.canny_edges(crop))
        before = int((crop < 255).sum())
        after = int((cleared.crop < 255).sum())
        assert after <= 0.01 * before

    def test_edge_shape_validated(self):
        crop = np.full((30, 300), 255, dtype=np.uint8)
        with pytest.raises(InvalidInputError):
            preproc.remove_rule_lines(self._line(crop), np.zeros((10, 10), dtype=bool))


def _banded_image(bands, height=100, width=60):
    img = np.full((height, width), 255, dtype=np.uint8)
    for y0, y1 in bands:
        img[y0:y1] = 0
    return img


class TestSegmentLines:
    def test_three_bands_three_lines(self):
        img = _banded_image([(10, 20), (40, 52), (80, 95)])
        lines = preproc.segment_lines(img, preproc.ink_profile(img))
        assert [(l.y_start, l.y_end) for l in lines] == [(8, 22), (38, 54), (78, 97)]

    def test_short_gap_merged(self):
        img = _banded_image([(10, 20), (25, 35)])  # gap of 5 < min_gap 8
        lines = preproc.segment_lines(img, preproc.ink_profile(img))
        assert len(lines) == 1
        assert (lines[0].y_start, lines[0].y_end) == (8, 37)

    def test_pad_clamped_at_borders(self):
        img = _banded_image([(0, 6)], height=30)
        (line,) = preproc.segment_lines(img, preproc.ink_profile(img))
        assert line.y_start == 0 and line.y_end == 8

    def test_crops_are_copies(self):
        img = _banded_image([(10, 20)])
        (line,) = preproc.segment_lines(img, preproc.ink_profile(img))
        line.crop[:] = 7
        assert (img[10:20] == 0).all()

    def test_blank_page_has_no_lines(self):
        img = np.full((40, 40), 255, dtype=np.uint8)
        assert preproc.segment_lines(img, preproc.ink_profile(img)) == []

    @settings(deadline=None, max_examples=80)
    @given(st.lists(st.booleans(), min_size=1, max_size=60),
           st.integers(1, 10), st.integers(0, 3))
    def test_spans_cover_active_rows(self, active, min_gap, pad):
        img = np.full((len(active), 20), 255, dtype=np.uint8)
        for i, a in enumerate(active):
            if a:
                img[i] = 0
        lines = preproc.segment_lines(
            img, preproc.ink_profile(img), min_gap=min_gap, pad=pad
        )
        spans = [(l.y_start, l.y_end) for l in lines]
        assert spans == sorted(spans)
        for y0, y1 in spans:
            assert 0 <= y0 < y1 <= len(active)
        for i, a in enumerate(active):
            if a:
                assert any(y0 <= i < y1 for y0, y1 in spans)
        if 2 * pad < min_gap:
            for (_, e0), (s1, _) in zip(spans, spans[1:]):
                assert e0 <= s1
