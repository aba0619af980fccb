"""Document preprocessing: grayscale, ink profile, baseline and rule-line
removal, and text-line segmentation.

Images are uint8 arrays in raw polarity (ink dark, paper 255).  The ink
profile inverts intensities (255 - v) so blank rows score near zero and
dense rows score high; stored images keep raw polarity throughout.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ConfigError, InvalidInputError

logger = logging.getLogger(__name__)

# Luma weights for grayscale conversion (standard broadcast primaries).
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# 8-neighbor offsets (dx, dy), clockwise starting East, y growing downward.
# The first edge pixel in this order is the tangent successor.
NEIGHBOR_ORDER = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))

# Canny localizes a thin rule's edges one or two rows off the ink row, so the
# erase mask grows this far from each flagged edge pixel before it is applied.
ERASE_REACH_ROWS = 2
ERASE_REACH_COLS = 1

# A near-horizontal edge run covering at least this fraction of the line
# width counts as a printed rule.
RULED_FRACTION = 0.6


@dataclass
class TextLine:
    """One segmented text line: source row span [y_start, y_end) and its crop."""

    y_start: int
    y_end: int
    crop: np.ndarray

    def __post_init__(self):
        if not self.y_start < self.y_end:
            raise InvalidInputError(f"empty line span [{self.y_start}, {self.y_end})")
        if self.crop.shape[0] != self.y_end - self.y_start:
            raise InvalidInputError("crop height does not match span")


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Collapse a 3-channel raster to 8-bit luma."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise InvalidInputError(f"expected an (H, W, 3) color raster, got shape {image.shape}")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise InvalidInputError("empty image")
    luma = image.astype(np.float64) @ np.asarray(LUMA_WEIGHTS)
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def ink_profile(img: np.ndarray) -> np.ndarray:
    """Per-row mean of inverted intensities (255 - v); one value per row."""
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise InvalidInputError("expected a non-empty grayscale image")
    return (255.0 - img.astype(np.float64)).mean(axis=1)


def contour_tangent(edge_map: np.ndarray, p: tuple[int, int]) -> float | None:
    """Tangent angle (degrees) at edge pixel p = (x, y).

    Uses the first 8-neighbor edge pixel in clockwise order from East.
    Vertical successors give exactly 90; the result is in (-90, 90].
    Returns None when p has no edge neighbor (isolated pixel).
    """
    x, y = p
    h, w = edge_map.shape
    if not (0 <= x < w and 0 <= y < h) or not edge_map[y, x]:
        raise InvalidInputError(f"({x}, {y}) is not an edge pixel")
    for dx, dy in NEIGHBOR_ORDER:
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and edge_map[ny, nx]:
            if dx == 0:
                return 90.0
            return float(np.degrees(np.arctan(dy / dx)))
    return None


def tangent_field(edge_map: np.ndarray) -> np.ndarray:
    """contour_tangent evaluated at every edge pixel at once.

    Returns a float array with the angle in (-90, 90] at edge pixels that
    have a successor, NaN elsewhere.
    """
    h, w = edge_map.shape
    shifted = []
    for dx, dy in NEIGHBOR_ORDER:
        m = np.zeros((h, w), dtype=bool)
        ys = slice(max(0, -dy), h - max(0, dy))
        xs = slice(max(0, -dx), w - max(0, dx))
        ys_src = slice(max(0, dy), h + min(0, dy))
        xs_src = slice(max(0, dx), w + min(0, dx))
        m[ys, xs] = edge_map[ys_src, xs_src]
        shifted.append(m)

    angles = [
        90.0 if dx == 0 else float(np.degrees(np.arctan(dy / dx)))
        for dx, dy in NEIGHBOR_ORDER
    ]
    field = np.select(shifted, angles, default=np.nan)
    field[~edge_map] = np.nan
    return field


def _erase_mask(flagged: np.ndarray) -> np.ndarray:
    """Grow flagged edge pixels into the band of ink they belong to."""
    structure = np.ones((2 * ERASE_REACH_ROWS + 1, 2 * ERASE_REACH_COLS + 1), dtype=bool)
    return ndimage.binary_dilation(flagged, structure=structure)


def remove_baselines(
    img: np.ndarray,
    edges: np.ndarray,
    profile: np.ndarray,
    hpp_thresh: float = 200.0,
    angle_thresh: float = 10.0,
) -> np.ndarray:
    """Blank pixels on high-ink rows whose local edge tangent is near zero.

    A pixel is erased (set to paper, 255) when its row's inverted-intensity
    mean exceeds hpp_thresh and a near-horizontal edge pixel
    (|angle| < angle_thresh) lies within the erase reach window.  Everything
    else is returned unchanged.
    """
    if not 0.0 <= hpp_thresh <= 255.0:
        raise ConfigError(f"hpp_thresh must be in [0, 255], got {hpp_thresh}")
    if not 0.0 <= angle_thresh <= 90.0:
        raise ConfigError(f"angle_thresh must be in [0, 90], got {angle_thresh}")
    if edges.shape != img.shape:
        raise InvalidInputError("edge map dimensions differ from image")
    if profile.shape[0] != img.shape[0]:
        raise InvalidInputError("profile length differs from image height")

    field = tangent_field(edges)
    with np.errstate(invalid="ignore"):
        flagged = np.abs(field) < angle_thresh
    erase = _erase_mask(flagged)
    erase &= (profile > hpp_thresh)[:, None]

    # A printed rule reads as a near-solid row, but its Canny response sits
    # on the flank rows and crossing strokes contaminate the local tangents,
    # so the per-pixel gate leaves fragments behind.  Blank the whole row
    # when it is near-solid and any near-horizontal evidence sits within the
    # erase reach; the reach requirement keeps the interior rows of thick
    # filled regions (no edges nearby) untouched.
    support = ndimage.maximum_filter1d(
        flagged.any(axis=1), 2 * ERASE_REACH_ROWS + 1
    )
    solid = (profile > hpp_thresh) & support
    erase |= solid[:, None]

    out = img.copy()
    out[erase] = 255
    return out


def segment_lines(
    img: np.ndarray,
    profile: np.ndarray,
    valley_frac: float = 0.05,
    min_gap: int = 8,
    pad: int = 2,
) -> list[TextLine]:
    """Split a page into text lines via its ink profile.

    Lines are maximal runs of rows above valley_frac * max(profile), merged
    across gaps shorter than min_gap, then widened by `pad` background rows
    on each side (clamped at the borders).  Crops are copies.
    """
    if profile.shape[0] != img.shape[0]:
        raise InvalidInputError("profile length differs from image height")
    peak = profile.max() if profile.size else 0.0
    if peak <= 0.0:
        return []
    active = profile > valley_frac * peak
    runs = _runs(active)
    runs = _merge_runs(runs, min_gap)

    lines = []
    for start, end in runs:
        y0 = max(0, start - pad)
        y1 = min(img.shape[0], end + pad)
        lines.append(TextLine(y0, y1, img[y0:y1].copy()))
    return lines


def _runs(active: np.ndarray) -> list[tuple[int, int]]:
    """Maximal [start, end) runs of True."""
    padded = np.concatenate(([False], active, [False]))
    delta = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(delta == 1)
    ends = np.flatnonzero(delta == -1)
    return list(zip(starts.tolist(), ends.tolist()))


def _merge_runs(runs: list[tuple[int, int]], min_gap: int) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in runs:
        if merged and start - merged[-1][1] < min_gap:
            merged[-1] = (merged[-1][0], end)
        else:
            merged.append((start, end))
    return merged


def remove_rule_lines(
    line: TextLine,
    edges: np.ndarray,
    angle_thresh: float = 10.0,
    ruled_fraction: float = RULED_FRACTION,
) -> TextLine:
    """Erase printed rules from a text-line crop.

    Rows where near-horizontal edge pixels cover at least ruled_fraction of
    the line width mark a rule; ink within the erase reach of those edge
    pixels is blanked.  Unruled lines come back unchanged.
    """
    if edges.shape != line.crop.shape:
        raise InvalidInputError("edge map dimensions differ from line crop")
    field = tangent_field(edges)
    with np.errstate(invalid="ignore"):
        flagged = np.abs(field) < angle_thresh
    coverage = flagged.sum(axis=1) / line.crop.shape[1]
    rule_rows = coverage >= ruled_fraction
    if not rule_rows.any():
        return TextLine(line.y_start, line.y_end, line.crop.copy())

    erase = _erase_mask(flagged & rule_rows[:, None])
    crop = line.crop.copy()
    crop[erase] = 255
    return TextLine(line.y_start, line.y_end, crop)
