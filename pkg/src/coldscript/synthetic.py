"""Deterministic synthetic handwriting surrogate.

Five stroke grammars stand in for five script styles. Each style fixes the
angle and length statistics of its strokes, so the downstream line-segment
clouds differ in shape rather than in absolute orientation:

  bars    long horizontals with short vertical ticks
  forks   long steep tines with two prong families at different depths
  slants  long down-right strokes with long shallow counters
  vees    long up-right strokes with flat cross strokes
  zigzag  chained steep legs, long one way and short the other

Every style pairs a dominant stroke family with minority families at a
style-specific relative angle and length ratio, so the clouds are tight
blob constellations that differ in shape, not in absolute orientation.

All randomness flows from numpy Generators seeded by the caller, so every
image, page, and corpus is bit-reproducible.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from . import image_io
from .errors import InvalidInputError

STYLES = ("bars", "forks", "slants", "vees", "zigzag")

LINE_WIDTH = 900
LINE_HEIGHT = 120
GLYPH_PITCH = 40
GLYPH_ROWS = (4.0, 40.0)  # two glyph rows, close enough to segment as one line
STROKE_PX = 2
RULE_PERIOD = 40


def _line_at_angle(x: float, y: float, angle_deg: float, length: float):
    """Segment from (x, y) with image-coordinate angle (y grows downward)."""
    a = np.radians(angle_deg)
    return (x, y, x + length * np.cos(a), y + length * np.sin(a))


def _glyph_bars(rng) -> list[tuple]:
    """Long horizontals with mid-length vertical ticks."""
    strokes = []
    for i in range(3):
        y = 8 + i * 14 + rng.uniform(-1.5, 1.5)
        strokes.append(("line", _line_at_angle(2 + rng.uniform(0, 3), y,
                                               rng.uniform(-2, 2),
                                               34 + rng.uniform(-3, 3))))
    for i in range(2):  # one tick per inter-bar band so no valley row opens up
        x = 8 + i * 18 + rng.uniform(-2, 2)
        strokes.append(("line", _line_at_angle(x, 11 + i * 13 + rng.uniform(-1, 1),
                                               90 + rng.uniform(-2, 2),
                                               11 + rng.uniform(-1, 1))))
    return strokes


def _glyph_slants(rng) -> list[tuple]:
    """Long down-right strokes plus long shallow counters 29 degrees away:
    two far blobs a small angle apart."""
    strokes = []
    for i in range(3):
        x = 3 + i * 10 + rng.uniform(-1.5, 1.5)
        strokes.append(("line", _line_at_angle(x, 5 + rng.uniform(0, 3),
                                               52 + rng.uniform(-3, 3),
                                               34 + rng.uniform(-2, 2))))
    for i in range(2):
        x = 2 + i * 16 + rng.uniform(-2, 2)
        strokes.append(("line", _line_at_angle(x, 24 + rng.uniform(-3, 3),
                                               23 + rng.uniform(-1.5, 1.5),
                                               27 + rng.uniform(-1, 1))))
    return strokes


def _glyph_vees(rng) -> list[tuple]:
    """Long up-right strokes crossed by shallow strokes 65 degrees away: a
    far blob plus a mid-radius blob at a wide angle."""
    strokes = []
    for i in range(3):
        x = 3 + i * 10 + rng.uniform(-1.5, 1.5)
        strokes.append(("line", _line_at_angle(x, 28 + rng.uniform(0, 3),
                                               -40 + rng.uniform(-3, 3),
                                               34 + rng.uniform(-2, 2))))
    for i in range(2):
        x = 4 + i * 16 + rng.uniform(-2, 2)
        strokes.append(("line", _line_at_angle(x, 30 + rng.uniform(-3, 3),
                                               25 + rng.uniform(-1.5, 1.5),
                                               22 + rng.uniform(-1, 1))))
    return strokes


def _glyph_forks(rng) -> list[tuple]:
    """Long steep tines with two prong families at different depths: three
    blobs at three radii, unlike every two-blob grammar."""
    strokes = []
    for i in range(3):
        x = 4 + i * 10 + rng.uniform(-1.5, 1.5)
        strokes.append(("line", _line_at_angle(x, 4 + rng.uniform(0, 3),
                                               80 + rng.uniform(-3, 3),
                                               34 + rng.uniform(-2, 2))))
    strokes.append(("line", _line_at_angle(8 + rng.uniform(-2, 2),
                                           16 + rng.uniform(-2, 2),
                                           30 + rng.uniform(-1.5, 1.5),
                                           15 + rng.uniform(-1, 1))))
    strokes.append(("line", _line_at_angle(18 + rng.uniform(-2, 2),
                                           34 + rng.uniform(-2, 2),
                                           45 + rng.uniform(-1.5, 1.5),
                                           30 + rng.uniform(-1, 1))))
    return strokes


def _glyph_zigzag(rng) -> list[tuple]:
    """Chained steep legs, long down and short up: a wide-angle vee in the
    cloud (legs 128 degrees apart) plus tiny connectors."""
    strokes = []
    x, y = 2.0, 4.0 + rng.uniform(0, 3)
    for leg in range(5):
        if leg % 2 == 0:
            angle = 64 + rng.uniform(-3, 3)
            length = 30 + rng.uniform(-2, 2)
        else:
            angle = -64 + rng.uniform(-3, 3)
            length = 12 + rng.uniform(-1.5, 1.5)
        a = np.radians(angle)
        nx, ny = x + length * np.cos(a), y + length * np.sin(a)
        strokes.append(("line", (x, y, nx, ny)))
        x, y = nx, ny
        if leg % 2 == 1:
            nx = x + rng.uniform(4, 6)
            strokes.append(("line", (x, y, nx, y + rng.uniform(-1, 1))))
            x = nx
    return strokes


_GLYPHS = {
    "bars": _glyph_bars,
    "forks": _glyph_forks,
    "slants": _glyph_slants,
    "vees": _glyph_vees,
    "zigzag": _glyph_zigzag,
}


def _draw_strokes(draw: ImageDraw.ImageDraw, strokes, ox: float, oy: float) -> None:
    for stroke in strokes:
        kind = stroke[0]
        if kind == "line":
            x0, y0, x1, y1 = stroke[1]
            draw.line((ox + x0, oy + y0, ox + x1, oy + y1),
                      fill=0, width=STROKE_PX)
        elif kind == "arc":
            x0, y0, x1, y1 = stroke[1]
            draw.arc((ox + x0, oy + y0, ox + x1, oy + y1),
                     stroke[2], stroke[3], fill=0, width=STROKE_PX)
        elif kind == "ellipse":
            x0, y0, x1, y1 = stroke[1]
            draw.ellipse((ox + x0, oy + y0, ox + x1, oy + y1),
                         outline=0, width=STROKE_PX)
        else:
            raise ValueError(f"unknown stroke kind {kind!r}")


def make_line_image(
    style: str,
    seed: int | np.random.Generator,
    width: int = LINE_WIDTH,
    height: int = LINE_HEIGHT,
) -> np.ndarray:
    """One white text-line image with glyphs of the given style."""
    if style not in _GLYPHS:
        raise InvalidInputError(f"unknown style {style!r}, expected one of {STYLES}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    img = Image.new("L", (width, height), 255)
    draw = ImageDraw.Draw(img)
    glyph = _GLYPHS[style]
    for row in GLYPH_ROWS:
        x = 12.0
        while x < width - GLYPH_PITCH:
            oy = row * (height / 120.0) + rng.uniform(-3, 3)
            _draw_strokes(draw, glyph(rng), x, oy)
            x += GLYPH_PITCH + rng.uniform(-4, 4)
    return np.asarray(img, dtype=np.uint8)


@dataclass
class PageSample:
    """A rendered page plus ground truth for preprocessing checks."""

    image: np.ndarray
    text_mask: np.ndarray       # ink pixels off the printed rules
    rule_mask: np.ndarray       # printed rule pixels (rule rows own overlaps)
    line_spans: list[tuple[int, int]] = field(default_factory=list)


def make_page(
    styles: list[str],
    seed: int,
    width: int = LINE_WIDTH,
    ruled: bool = False,
    rule_period: int = RULE_PERIOD,
) -> PageSample:
    """Stack one text line per style entry, optionally over printed rules.

    Rules are 1-px full-width black rows every rule_period rows, drawn under
    the text. Pixels where ink crosses a rule belong to the rule mask, so
    the two truth masks are disjoint.
    """
    rng = np.random.default_rng(seed)
    top = int(rng.integers(30, 70))
    gaps = [int(rng.integers(30, 60)) for _ in styles]
    spans = []
    y = top
    for gap in gaps:
        spans.append((y, y + LINE_HEIGHT))
        y = y + LINE_HEIGHT + gap
    height = y + int(rng.integers(20, 50))

    page = np.full((height, width), 255, dtype=np.uint8)
    for style, (y0, y1) in zip(styles, spans):
        band = make_line_image(style, rng, width=width, height=LINE_HEIGHT)
        page[y0:y1] = np.minimum(page[y0:y1], band)
    text_mask = page < 255

    rule_mask = np.zeros_like(text_mask)
    if ruled:
        rule_rows = np.arange(rule_period, height, rule_period)
        rule_mask[rule_rows, :] = True
        page[rule_mask & ~text_mask] = 0
        text_mask &= ~rule_mask
    return PageSample(image=page, text_mask=text_mask, rule_mask=rule_mask,
                      line_spans=spans)


def make_corpus(
    out_dir: str | Path,
    per_class: int = 100,
    seed: int = 0,
    styles: tuple[str, ...] = STYLES,
) -> Path:
    """Write per_class line images per style plus a manifest.csv; returns the
    manifest path. Image n of a style reuses seed*1e6 + style index and n so
    corpora with the same arguments are identical byte for byte."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = out / "manifest.csv"
    rows = []
    for si, style in enumerate(styles):
        for n in range(per_class):
            img = make_line_image(style, seed * 1_000_000 + si * 10_000 + n)
            name = f"{style}_{n:03d}.png"
            image_io.write_png(img, out / name)
            rows.append((name, style, f"w{n % 10:02d}"))
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "writer"])
        writer.writerows(rows)
    return manifest
