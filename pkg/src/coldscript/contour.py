"""Edge maps, traced contours, and dominant points.

Edge maps are boolean arrays the same shape as their source image.  Contour
points are (x, y) pixel coordinates ordered along the trace.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .errors import ConfigError, InvalidInputError
from .preproc import NEIGHBOR_ORDER

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)

_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass
class Contour:
    """One traced edge path; consecutive points are 8-connected."""

    points: list[tuple[int, int]]
    closed: bool = False


@dataclass
class DominantPointSet:
    """Polygonal-approximation vertices of a contour, in contour order."""

    points: list[tuple[int, int]]
    epsilon: float
    closed: bool = False
    indices: list[int] = field(default_factory=list)


class SegmentPair(NamedTuple):
    a: tuple[float, float]
    b: tuple[float, float]


def canny_edges(
    img: np.ndarray,
    low: float = 50.0,
    high: float = 150.0,
    sigma: float = 1.4,
) -> np.ndarray:
    """Canny edge map: Gaussian smoothing, Sobel gradient, non-maximum
    suppression, then double-threshold hysteresis.  Deterministic."""
    if not 0.0 <= low < high:
        raise ConfigError(f"need 0 <= low < high, got low={low}, high={high}")
    if img.ndim != 2 or img.size == 0:
        raise InvalidInputError("expected a non-empty grayscale image")

    smooth = ndimage.gaussian_filter(img.astype(np.float64), sigma, mode="nearest")
    gx = ndimage.convolve(smooth, SOBEL_X, mode="nearest")
    gy = ndimage.convolve(smooth, SOBEL_Y, mode="nearest")
    mag = np.hypot(gx, gy)

    ridge = _non_maximum_suppression(mag, gx, gy)
    weak = ridge & (mag >= low)
    strong = ridge & (mag >= high)
    if not strong.any():
        return np.zeros_like(weak)

    labels, _ = ndimage.label(weak, structure=_EIGHT)
    keep = np.unique(labels[strong])
    return _thin_edges(weak & np.isin(labels, keep))


# Ring neighborhood in circular order: N, NE, E, SE, S, SW, W, NW.
_RING = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def _thin_edges(edges: np.ndarray) -> np.ndarray:
    """Drop 8-simple pixels (staircase bumps left by suppression near-ties)
    so traced contours are single-pixel curves.

    A pixel goes when its Yokoi 8-connectivity number is 1 and it has 2..6
    neighbors: removal then cannot split its component, and endpoints
    (1 neighbor) are never touched.  Deletion is sequential in raster order,
    which keeps the result deterministic.
    """
    e = edges.copy()
    h, w = e.shape
    while True:
        # Vectorized candidate pass; deletions still apply one at a time so
        # two adjacent simple pixels cannot vanish together.
        p = np.pad(e, 1).astype(np.uint8)
        inv = [1 - p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w] for dx, dy in _RING]
        count = 8 - sum(inv)
        yokoi = sum(
            inv[k] - inv[k] * inv[(k + 1) % 8] * inv[(k + 2) % 8]
            for k in (0, 2, 4, 6)
        )
        candidates = e & (count >= 2) & (count <= 6) & (yokoi == 1)
        if not candidates.any():
            return e
        changed = False
        for y, x in zip(*(a.tolist() for a in np.nonzero(candidates))):
            inv = [
                0 if (0 <= y + dy < h and 0 <= x + dx < w and e[y + dy, x + dx]) else 1
                for dx, dy in _RING
            ]
            if not 2 <= 8 - sum(inv) <= 6:
                continue
            if sum(
                inv[k] - inv[k] * inv[(k + 1) % 8] * inv[(k + 2) % 8]
                for k in (0, 2, 4, 6)
            ) == 1:
                e[y, x] = False
                changed = True
        if not changed:
            return e


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin the gradient magnitude to 1-px ridges along the gradient direction.

    The magnitude one unit ahead of and behind each pixel along its own
    gradient direction is bilinearly interpolated, so diagonal edges thin as
    cleanly as axis-aligned ones.  Plateaus keep the pixel farther along the
    gradient (>= behind, > ahead), so a clean step edge yields a single line.
    """
    h, w = mag.shape
    padded = np.zeros((h + 4, w + 4), dtype=mag.dtype)
    padded[2:-2, 2:-2] = mag

    live = mag > 0
    ux = np.zeros_like(mag)
    uy = np.zeros_like(mag)
    np.divide(gx, mag, out=ux, where=live)
    np.divide(gy, mag, out=uy, where=live)
    ys, xs = np.mgrid[0:h, 0:w]

    def sample(sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
        x0 = np.floor(sx).astype(int)
        y0 = np.floor(sy).astype(int)
        fx = sx - x0
        fy = sy - y0
        x0 += 2
        y0 += 2
        return (
            padded[y0, x0] * (1 - fx) * (1 - fy)
            + padded[y0, x0 + 1] * fx * (1 - fy)
            + padded[y0 + 1, x0] * (1 - fx) * fy
            + padded[y0 + 1, x0 + 1] * fx * fy
        )

    ahead = sample(xs + ux, ys + uy)
    behind = sample(xs - ux, ys - uy)
    return live & (mag > ahead) & (mag >= behind)


def trace_contours(edges: np.ndarray, min_component: int = 8) -> list[Contour]:
    """Order every edge pixel into contours.

    Pixels are grouped by 8-connectivity; components smaller than
    min_component are discarded as noise.  Each component is walked in the
    clockwise neighbor order, starting at degree-1 pixels (curve endpoints)
    when it has any; leftover branch pixels seed further contours so every
    edge pixel lands in exactly one.
    """
    if min_component < 1:
        raise ConfigError(f"min_component must be >= 1, got {min_component}")
    labels, count = ndimage.label(edges, structure=_EIGHT)
    if count == 0:
        return []
    sizes = np.bincount(labels.ravel())

    h, w = edges.shape
    visited = np.zeros((h, w), dtype=bool)
    degree = _neighbor_counts(edges)

    contours: list[Contour] = []
    order = np.argwhere(edges)  # (row, col) in scan order
    by_label: dict[int, list[tuple[int, int]]] = {}
    for row, col in order:
        by_label.setdefault(int(labels[row, col]), []).append((int(col), int(row)))

    for label in range(1, count + 1):
        if sizes[label] < min_component:
            continue
        pixels = by_label[label]
        starts = [p for p in pixels if degree[p[1], p[0]] == 1] + pixels
        for sx, sy in starts:
            if visited[sy, sx]:
                continue
            path = _walk(edges, visited, sx, sy)
            closed = len(path) >= 3 and _adjacent(path[0], path[-1])
            contours.append(Contour(points=path, closed=closed))
    return contours


def _neighbor_counts(edges: np.ndarray) -> np.ndarray:
    padded = np.pad(edges, 1).astype(np.uint8)
    total = np.zeros_like(edges, dtype=np.uint8)
    h, w = edges.shape
    for dx, dy in NEIGHBOR_ORDER:
        total += padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return total


def _adjacent(p: tuple[int, int], q: tuple[int, int]) -> bool:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1


def _walk(edges: np.ndarray, visited: np.ndarray, sx: int, sy: int) -> list[tuple[int, int]]:
    h, w = edges.shape
    path = [(sx, sy)]
    visited[sy, sx] = True
    x, y = sx, sy
    last_dir = 0
    while True:
        nxt = None
        for k in range(8):
            d = (last_dir + 5 + k) % 8  # resume clockwise after the backtrack direction
            dx, dy = NEIGHBOR_ORDER[d]
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and edges[ny, nx] and not visited[ny, nx]:
                nxt = (nx, ny, d)
                break
        if nxt is None:
            return path
        x, y, last_dir = nxt
        visited[y, x] = True
        path.append((x, y))


def dominant_points(c: Contour, epsilon: float) -> DominantPointSet:
    """Simplify a contour to its dominant points (recursive farthest-point
    splitting with tolerance epsilon).

    Closed contours are first split at the point farthest from point 0 so
    both halves have fixed endpoints.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    pts = np.asarray(c.points, dtype=np.float64)
    if len(pts) < 2:
        raise InvalidInputError("contour needs at least 2 points")
    if np.all(pts == pts[0]):
        raise InvalidInputError("degenerate contour: all points identical")

    n = len(pts)
    keep: set[int] = set()
    if c.closed:
        far = int(np.argmax(np.linalg.norm(pts - pts[0], axis=1)))
        _simplify(pts, 0, far, epsilon, keep)
        # wrap half: far .. n-1 plus a virtual copy of point 0
        wrapped = np.vstack([pts[far:], pts[:1]])
        sub: set[int] = set()
        _simplify(wrapped, 0, len(wrapped) - 1, epsilon, sub)
        keep |= {far + i for i in sub if far + i < n}
        keep |= {0, far}
    else:
        _simplify(pts, 0, n - 1, epsilon, keep)
        keep |= {0, n - 1}

    indices = sorted(keep)
    return DominantPointSet(
        points=[c.points[i] for i in indices],
        epsilon=epsilon,
        closed=c.closed,
        indices=indices,
    )


def _simplify(pts: np.ndarray, lo: int, hi: int, epsilon: float, keep: set[int]) -> None:
    """Collect interior indices whose removal would deviate more than epsilon."""
    stack = [(lo, hi)]
    while stack:
        lo, hi = stack.pop()
        if hi <= lo + 1:
            continue
        seg = pts[hi] - pts[lo]
        length = float(np.hypot(seg[0], seg[1]))
        rel = pts[lo + 1 : hi] - pts[lo]
        if length == 0.0:
            dist = np.linalg.norm(rel, axis=1)
        else:
            dist = np.abs(seg[0] * rel[:, 1] - seg[1] * rel[:, 0]) / length
        k = int(np.argmax(dist))
        if dist[k] > epsilon:
            split = lo + 1 + k
            keep.add(split)
            stack.append((lo, split))
            stack.append((split, hi))


def segment_pairs(d: DominantPointSet) -> list[SegmentPair]:
    """Join consecutive dominant points into line segments (wrapping around
    for closed contours); zero-length pairs are dropped."""
    if len(d.points) < 2:
        raise InvalidInputError("need at least 2 dominant points")
    pts = list(d.points)
    raw = list(zip(pts, pts[1:]))
    if d.closed:
        raw.append((pts[-1], pts[0]))
    return [
        SegmentPair((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))
        for a, b in raw
        if a[0] != b[0] or a[1] != b[1]
    ]
