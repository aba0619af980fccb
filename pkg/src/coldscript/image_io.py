"""Reading and writing of the raster formats the pipeline touches.

Grayscale images travel through the pipeline as 2-D uint8 arrays (row-major,
0 = black ink, 255 = paper); color input is (H, W, 3) uint8.  PNG and binary
PGM (P5) are supported on both ends via Pillow.
"""

import os
import tempfile
from pathlib import Path

import numpy as np
from PIL import Image


def read_image(path: str | Path) -> np.ndarray:
    """Load a PNG or PGM file as uint8; grayscale (H, W) or color (H, W, 3)."""
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "P", "1"):
            return np.asarray(im.convert("L"), dtype=np.uint8)
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def write_png(img: np.ndarray, path: str | Path) -> None:
    _atomic_save(img, Path(path), "PNG")


def write_pgm(img: np.ndarray, path: str | Path) -> None:
    """Write a 2-D uint8 array as binary PGM (P5)."""
    if img.ndim != 2:
        raise ValueError("PGM output requires a single-channel image")
    _atomic_save(img, Path(path), "PPM")  # Pillow emits P5 for mode L


def _atomic_save(img: np.ndarray, path: Path, fmt: str) -> None:
    # temp + rename so concurrent runs never see half-written files
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            Image.fromarray(np.ascontiguousarray(img)).save(fh, format=fmt)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(text: str, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
