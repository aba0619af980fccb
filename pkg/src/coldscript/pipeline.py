"""End-to-end composition of the processing stages.

A page goes through grayscale conversion, baseline erasure, and line
segmentation; each line crop then yields contours, dominant points, a
cold distribution, and finally a fixed-length feature vector.
"""

from dataclasses import dataclass, field

import numpy as np

from . import cold, contour, features, preproc
from .config import PipelineConfig
from .errors import DegenerateDataError


@dataclass
class PageResult:
    cleaned: np.ndarray
    lines: list[preproc.TextLine]
    stats: dict = field(default_factory=dict)


def preprocess_page(image: np.ndarray, config: PipelineConfig) -> PageResult:
    """Clean a scanned page and split it into text-line crops.

    Baseline erasure runs on the whole page first (full-width ruled rows),
    then each segmented line gets a second rule-removal pass for partial
    rules that survive inside the crop.
    """
    config.validate()
    gray = preproc.to_grayscale(image) if image.ndim == 3 else image
    profile = preproc.ink_profile(gray)
    edges = contour.canny_edges(
        gray, low=config.canny_low, high=config.canny_high, sigma=config.canny_sigma
    )
    cleaned = preproc.remove_baselines(
        gray, edges, profile,
        hpp_thresh=config.hpp_thresh, angle_thresh=config.angle_thresh,
    )
    erased = int(((cleaned == 255) & (gray != 255)).sum())

    lines = preproc.segment_lines(
        cleaned, preproc.ink_profile(cleaned),
        valley_frac=config.valley_frac, min_gap=config.min_gap,
    )
    out_lines = []
    rules_cleared = 0
    for line in lines:
        line_edges = contour.canny_edges(
            line.crop, low=config.canny_low, high=config.canny_high,
            sigma=config.canny_sigma,
        )
        cleared = preproc.remove_rule_lines(
            line, line_edges, angle_thresh=config.angle_thresh
        )
        rules_cleared += int((cleared.crop != line.crop).sum() > 0)
        out_lines.append(cleared)

    return PageResult(
        cleaned=cleaned,
        lines=out_lines,
        stats={
            "pixels_erased": erased,
            "lines": len(out_lines),
            "lines_with_rules": rules_cleared,
        },
    )


def line_stages(
    line_img: np.ndarray, config: PipelineConfig
) -> tuple[np.ndarray, list[contour.DominantPointSet]]:
    """Edge map and per-contour dominant points of one text-line image."""
    config.validate()
    gray = preproc.to_grayscale(line_img) if line_img.ndim == 3 else line_img
    edges = contour.canny_edges(
        gray, low=config.canny_low, high=config.canny_high, sigma=config.canny_sigma
    )
    point_sets = [
        contour.dominant_points(c, config.rdp_epsilon)
        for c in contour.trace_contours(edges, min_component=config.min_component)
        if len(c.points) >= 2  # singletons are leftover junction pixels
    ]
    return edges, point_sets


def line_distribution(
    line_img: np.ndarray, config: PipelineConfig
) -> cold.ColdDistribution | None:
    """Cold distribution of one text-line image; None when the image has no
    usable contour segments (blank or too sparse)."""
    _, point_sets = line_stages(line_img, config)
    pairs = [pair for dps in point_sets for pair in contour.segment_pairs(dps)]
    if not pairs:
        return None
    return cold.build_distribution(pairs, plane_radius=config.plane_radius)


def line_features(
    line_img: np.ndarray, config: PipelineConfig
) -> tuple[np.ndarray, cold.ColdDistribution | None]:
    """Feature vector for one text-line image.

    Degenerate inputs (no segments, or a cloud too small for a principal
    axis) yield the zero vector so callers can emit a warning row instead
    of failing the whole batch.
    """
    dist = line_distribution(line_img, config)
    if dist is None:
        return np.zeros(config.bins), None
    raster = features.rasterize(dist)
    try:
        axis = features.principal_axis(raster)
    except DegenerateDataError:
        return np.zeros(config.bins), dist
    records = features.scan_profile(raster, axis)
    vec = features.to_feature_vector(
        records, bins=config.bins, plane_radius=config.plane_radius
    )
    return vec, dist
