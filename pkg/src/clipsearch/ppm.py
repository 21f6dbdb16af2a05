"""Binary PPM (P6) image reading and writing.

Frame directories use P6 with maxval 255 so test corpora are bit-exact and
need no codec. Comments (``#`` to end of line) are allowed in the header.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidInputError


def _read_header_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # Skip whitespace and '#' comments, then collect one token.
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise InvalidInputError("truncated PPM header")
    return data[start:pos], pos


def read_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary P6 PPM file into an RGB uint8 array of shape (h, w, 3)."""
    with open(path, "rb") as f:
        data = f.read()

    magic, pos = _read_header_token(data, 0)
    if magic != b"P6":
        raise InvalidInputError(f"{path}: not a binary PPM (magic {magic!r})")
    fields = []
    for _ in range(3):
        token, pos = _read_header_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise InvalidInputError(f"{path}: bad PPM header token {token!r}") from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise InvalidInputError(f"{path}: bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise InvalidInputError(f"{path}: unsupported PPM maxval {maxval} (expected 255)")

    pos += 1  # single whitespace byte after maxval
    expected = width * height * 3
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise InvalidInputError(
            f"{path}: short pixel data ({len(raster)} of {expected} bytes)"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path: str | os.PathLike, pixels: np.ndarray) -> None:
    """Write an RGB uint8 array of shape (h, w, 3) as binary P6, maxval 255."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"expected (h, w, 3) RGB array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise InvalidInputError(f"expected uint8 pixels, got {arr.dtype}")
    height, width = arr.shape[:2]
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (width, height))
        f.write(arr.tobytes())
