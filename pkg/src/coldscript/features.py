"""Fixed-length descriptors from a cold distribution.

The distribution is rasterized onto a square plane, its principal axis is
found by PCA over the set pixels, and the plane is scanned along that axis:
at each step the distances to the first mark on either side of the axis are
recorded, and the per-position left/right asymmetry is binned into the final
feature vector.
"""

import math
from dataclasses import dataclass

import numpy as np

from .cold import ColdDistribution
from .errors import ConfigError, DegenerateDataError

SCAN_EPS = 1e-12


@dataclass
class PrincipalAxis:
    centroid: np.ndarray   # (x, y) in pixel coordinates, x right / y down
    direction: np.ndarray  # unit vector, x >= 0 (y >= 0 when x == 0)


@dataclass
class ScanRecord:
    t: float     # signed step along the axis from the centroid
    left: float  # steps to the first mark on the left of the axis
    right: float
    diff: float  # |left - right|


def rasterize(d: ColdDistribution) -> np.ndarray:
    """Boolean plane of side 2*plane_radius+1 with one pixel per point.

    Plane coordinates are y-up: a point at theta=90 sits above the center.
    """
    radius = int(round(d.plane_radius))
    side = 2 * radius + 1
    grid = np.zeros((side, side), dtype=bool)
    if d.count:
        ang = np.radians(d.theta)
        rr = np.minimum(d.r, d.plane_radius)
        cols = radius + np.rint(rr * np.cos(ang)).astype(int)
        rows = radius - np.rint(rr * np.sin(ang)).astype(int)
        grid[rows.clip(0, side - 1), cols.clip(0, side - 1)] = True
    return grid


def principal_axis(raster: np.ndarray) -> PrincipalAxis:
    """Dominant direction of the set pixels, from the covariance eigenvectors.

    The sign is fixed so direction.x >= 0 (and direction.y >= 0 for a
    vertical axis); ties between eigenvalues fall back on whichever
    eigenvector the solver lists last, which is deterministic.
    """
    rows, cols = np.nonzero(raster)
    pts = np.column_stack([cols, rows]).astype(float)
    if len(pts) < 2 or (pts == pts[0]).all():
        raise DegenerateDataError(
            f"principal axis needs >= 2 distinct pixels, got {len(pts)}"
        )
    centroid = pts.mean(axis=0)
    cov = np.cov(pts.T, bias=True)
    _, vecs = np.linalg.eigh(cov)
    direction = vecs[:, -1]
    if direction[0] < 0 or (direction[0] == 0 and direction[1] < 0):
        direction = -direction
    return PrincipalAxis(centroid=centroid, direction=direction)


def scan_profile(raster: np.ndarray, axis: PrincipalAxis) -> list[ScanRecord]:
    """Walk the axis through the plane and measure both-side mark distances.

    At each integer step t from the centroid, march perpendicular to the
    axis one step at a time (k = 0, 1, 2, ...) on each side and record the
    first k whose rounded pixel is set. Positions where either side never
    hits a mark are dropped.
    """
    side = raster.shape[0]
    u = axis.direction.astype(float)
    normal = np.array([-u[1], u[0]])
    reach = int(math.ceil(side * math.sqrt(2.0)))
    t = np.arange(-reach, reach + 1, dtype=float)
    base = axis.centroid[None, :] + t[:, None] * u[None, :]
    bx = np.rint(base[:, 0]).astype(int)
    by = np.rint(base[:, 1]).astype(int)
    on_plane = (bx >= 0) & (bx < side) & (by >= 0) & (by < side)
    t = t[on_plane]
    base = base[on_plane]
    if not len(t):
        return []

    k = np.arange(0, reach + 1, dtype=float)
    hits = []
    for sign in (1.0, -1.0):
        pos = base[:, None, :] + sign * k[None, :, None] * normal[None, None, :]
        xi = np.rint(pos[..., 0]).astype(int)
        yi = np.rint(pos[..., 1]).astype(int)
        inside = (xi >= 0) & (xi < side) & (yi >= 0) & (yi < side)
        hit = inside & raster[yi.clip(0, side - 1), xi.clip(0, side - 1)]
        hits.append((hit.any(axis=1), hit.argmax(axis=1)))

    (left_ok, left_k), (right_ok, right_k) = hits
    keep = left_ok & right_ok
    return [
        ScanRecord(t=float(ti), left=float(l), right=float(r), diff=float(abs(l - r)))
        for ti, l, r in zip(t[keep], left_k[keep], right_k[keep])
    ]


def to_feature_vector(
    records: list[ScanRecord], bins: int = 64, plane_radius: float = 150.0
) -> np.ndarray:
    """Bin the scan differences along the axis into a fixed-length vector.

    Positions are min-max normalized over the records, diffs are averaged
    per bin and divided by the plane radius, then clamped to [0, 1]. No
    records at all gives the zero vector.
    """
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    if plane_radius <= 0:
        raise ConfigError(f"plane_radius must be > 0, got {plane_radius}")
    vec = np.zeros(bins)
    if not records:
        return vec
    t = np.array([rec.t for rec in records])
    diff = np.array([rec.diff for rec in records])
    lo, hi = t.min(), t.max()
    span = hi - lo
    if span < SCAN_EPS:
        idx = np.zeros(len(t), dtype=int)
    else:
        idx = np.minimum(((t - lo) / span * bins).astype(int), bins - 1)
    sums = np.zeros(bins)
    counts = np.zeros(bins)
    np.add.at(sums, idx, diff)
    np.add.at(counts, idx, 1.0)
    filled = counts > 0
    vec[filled] = sums[filled] / counts[filled] / plane_radius
    return np.minimum(vec, 1.0)
