"""Binary PGM (P5) and PPM (P6) reading and writing, bit-exact.

Only 8-bit rasters (maxval <= 255) are supported. Masks are stored as PGM
with 0 = non-building and 255 = building; any nonzero value reads back as
a set pixel.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import CorruptDataError
from .fileio import atomic_write_bytes

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos : pos + 1] == b"#":
            while pos < n and data[pos] not in b"\n":
                pos += 1
        elif data[pos] in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise CorruptDataError("unexpected end of header")
    return data[start:pos], pos


def read_pnm(path: str | Path) -> np.ndarray:
    """Read a P5 raster as (H, W) uint8 or a P6 raster as (H, W, 3) uint8."""
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise CorruptDataError(f"unsupported raster magic {magic!r}")
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise CorruptDataError(f"non-numeric header field {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise CorruptDataError(f"bad raster dims {width}x{height}")
    if not 0 < maxval <= 255:
        raise CorruptDataError(f"unsupported maxval {maxval}")
    pos += 1  # single whitespace byte separates header from raster
    expected = width * height * channels
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise CorruptDataError(f"raster truncated: {len(raster)} of {expected} bytes")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width).copy()
    return arr.reshape(height, width, 3).copy()


def write_pgm(path: str | Path, gray: np.ndarray) -> None:
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise CorruptDataError(f"PGM wants (H, W) uint8, got {gray.shape} {gray.dtype}")
    h, w = gray.shape
    atomic_write_bytes(path, b"P5\n%d %d\n255\n" % (w, h) + gray.tobytes())


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise CorruptDataError(f"PPM wants (H, W, 3) uint8, got {rgb.shape} {rgb.dtype}")
    h, w = rgb.shape[:2]
    atomic_write_bytes(path, b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes())


def mask_to_gray(mask: np.ndarray) -> np.ndarray:
    return np.where(mask.astype(bool), np.uint8(255), np.uint8(0))


def gray_to_mask(gray: np.ndarray) -> np.ndarray:
    return gray > 0
