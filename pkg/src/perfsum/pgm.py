"""Minimal portable graymap (PGM) reader and writer, plain (P2) and raw (P5)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from perfsum.errors import DataError


class PGMError(DataError):
    pass


_WS = b" \t\r\n\v\f"


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset just past the last token.
    """
    tokens, i, n = [], 0, len(data)
    while len(tokens) < count:
        while i < n and data[i] in _WS:
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] not in b"\r\n":
                i += 1
            continue
        if i >= n:
            raise PGMError("truncated PGM header")
        start = i
        while i < n and data[i] not in _WS and data[i] != ord("#"):
            i += 1
        tokens.append(data[start:i])
    return tokens, i


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode PGM bytes into a ``(height, width)`` array of uint8 or uint16."""
    tokens, off = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise PGMError(f"not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise PGMError("non-integer PGM header field") from None
    if width < 1 or height < 1 or not (0 < maxval < 65536):
        raise PGMError(f"invalid PGM header: {width}x{height}, maxval {maxval}")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    npix = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        off += 1
        nbytes = npix * np.dtype(dtype).itemsize
        raster = data[off : off + nbytes]
        if len(raster) < nbytes:
            raise PGMError(f"truncated raster: expected {nbytes} bytes, got {len(raster)}")
        img = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    else:
        values = data[off:].split()
        if len(values) < npix:
            raise PGMError(f"truncated raster: expected {npix} values, got {len(values)}")
        try:
            img = np.array([int(v) for v in values[:npix]], dtype=np.int64).reshape(height, width)
        except ValueError:
            raise PGMError("non-integer value in plain PGM raster") from None
    if int(img.max()) > maxval or int(img.min()) < 0:
        raise PGMError(f"pixel value outside [0, {maxval}]")
    return img.astype(np.uint8 if maxval < 256 else np.uint16)


def read_pgm(path: str | Path) -> np.ndarray:
    try:
        return parse_pgm(Path(path).read_bytes())
    except PGMError as e:
        raise PGMError(f"{path}: {e}") from None


def write_pgm(path: str | Path, image: np.ndarray, plain: bool = False) -> None:
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError("a graymap must be two-dimensional")
    maxval = 255 if int(image.max(initial=0)) < 256 else 65535
    h, w = image.shape
    header = f"{'P2' if plain else 'P5'}\n{w} {h}\n{maxval}\n".encode("ascii")
    if plain:
        body = "\n".join(" ".join(str(int(v)) for v in row) for row in image).encode("ascii") + b"\n"
    else:
        body = image.astype(np.uint8 if maxval == 255 else ">u2").tobytes()
    Path(path).write_bytes(header + body)
