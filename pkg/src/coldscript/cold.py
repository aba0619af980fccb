"""Cloud-of-line distributions: line segments mapped to (angle, length)
points in a polar plane of fixed radius.

Angles live in (-90, 90] degrees (a segment is unordered, so the direction
is folded); lengths are scaled so the 99th-percentile segment length lands
on the plane radius, with longer segments clamped.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import image_io
from .contour import SegmentPair
from .errors import ConfigError, DegenerateDataError, InvalidInputError

LENGTH_PERCENTILE = 99.0


class PolarPoint(NamedTuple):
    theta: float  # degrees, (-90, 90]
    r: float      # length, >= 0


@dataclass
class ColdDistribution:
    """Multiset of polar points; theta[i], r[i] form one point."""

    theta: np.ndarray = field(default_factory=lambda: np.empty(0))
    r: np.ndarray = field(default_factory=lambda: np.empty(0))
    plane_radius: float = 150.0
    scale_factor: float = 1.0

    @property
    def count(self) -> int:
        return len(self.theta)

    def points(self) -> list[PolarPoint]:
        return [PolarPoint(float(t), float(r)) for t, r in zip(self.theta, self.r)]


def to_polar(p: SegmentPair) -> PolarPoint:
    """Angle and length of one segment; vertical segments map to 90 degrees."""
    (x0, y0), (x1, y1) = p
    dx = x1 - x0
    dy = y1 - y0
    if dx == 0 and dy == 0:
        raise InvalidInputError(f"zero-length segment at {p.a}")
    theta = 90.0 if dx == 0 else math.degrees(math.atan(dy / dx))
    if theta <= -90.0 or theta > 90.0:
        # atan of a huge |dy/dx| can round onto the boundary; fold it to the
        # closed end so theta stays in (-90, 90].
        theta = 90.0
    return PolarPoint(theta, math.hypot(dx, dy))


def build_distribution(
    pairs: list[SegmentPair], plane_radius: float = 150.0
) -> ColdDistribution:
    """Convert segments to polar points and normalize lengths into the plane.

    The scale factor maps the 99th-percentile raw length onto plane_radius;
    scaled lengths beyond the radius are clamped.
    """
    if plane_radius <= 0:
        raise ConfigError(f"plane_radius must be > 0, got {plane_radius}")
    if not pairs:
        raise DegenerateDataError("cannot build a distribution from an empty pair list")
    points = [to_polar(p) for p in pairs]
    theta = np.array([pt.theta for pt in points])
    r = np.array([pt.r for pt in points])
    ref = float(np.percentile(r, LENGTH_PERCENTILE))
    scale = plane_radius / ref
    return ColdDistribution(
        theta=theta,
        r=np.minimum(r * scale, plane_radius),
        plane_radius=float(plane_radius),
        scale_factor=scale,
    )


def merge(a: ColdDistribution, b: ColdDistribution) -> ColdDistribution:
    """Multiset union of two distributions over the same plane."""
    if a.plane_radius != b.plane_radius:
        raise ConfigError(
            f"plane_radius mismatch: {a.plane_radius} vs {b.plane_radius}"
        )
    if a.count == 0:
        scale = b.scale_factor
    elif b.count == 0 or a.scale_factor == b.scale_factor:
        scale = a.scale_factor
    else:
        scale = 1.0  # mixed scales: merged points are taken as already scaled
    return ColdDistribution(
        theta=np.concatenate([a.theta, b.theta]),
        r=np.concatenate([a.r, b.r]),
        plane_radius=a.plane_radius,
        scale_factor=scale,
    )


# Plot colors: marks must be distinguishable from the axes so downstream
# checks can count mark clusters.
PLOT_BACKGROUND = (255, 255, 255)
PLOT_AXES = (192, 192, 192)
PLOT_MARK = (0, 0, 0)


def render_plot(d: ColdDistribution, path: str | Path) -> None:
    """Write a PNG scatter of the distribution on a square polar canvas.

    Points land at center + (r cos(theta), r sin(theta)) with y up; the two
    axes are drawn in light gray, marks in black.
    """
    radius = int(round(d.plane_radius))
    side = 2 * radius + 1
    canvas = np.full((side, side, 3), PLOT_BACKGROUND, dtype=np.uint8)
    canvas[radius, :] = PLOT_AXES
    canvas[:, radius] = PLOT_AXES
    if d.count:
        ang = np.radians(d.theta)
        rr = np.minimum(d.r, d.plane_radius)
        cols = radius + np.rint(rr * np.cos(ang)).astype(int)
        rows = radius - np.rint(rr * np.sin(ang)).astype(int)
        canvas[rows.clip(0, side - 1), cols.clip(0, side - 1)] = PLOT_MARK
    image_io.write_png(canvas, path)


def save_distribution(d: ColdDistribution, path: str | Path) -> None:
    """Dump as plain text: a plane_radius header, then theta,r per line."""
    lines = [f"plane_radius={d.plane_radius:g}"]
    lines += [f"{float(t)!r},{float(r)!r}" for t, r in zip(d.theta, d.r)]
    image_io.atomic_write_text("\n".join(lines) + "\n", path)


def load_distribution(path: str | Path) -> ColdDistribution:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or not text[0].startswith("plane_radius="):
        raise InvalidInputError(f"{path}: missing plane_radius header")
    plane_radius = float(text[0].split("=", 1)[1])
    theta, r = [], []
    for line in text[1:]:
        t_str, r_str = line.split(",")
        theta.append(float(t_str))
        r.append(float(r_str))
    return ColdDistribution(
        theta=np.array(theta), r=np.array(r), plane_radius=plane_radius
    )
