"""Reader/writer for grayscale PFM, the float disparity interchange format.

On-disk layout::

    Pf\n
    <width> <height>\n
    <scale>\n
    <height * width little- or big-endian float32, rows bottom-up>

A negative scale declares little-endian payload bytes; the absolute value is
the sample scale factor. Only the single-channel ``Pf`` variant is supported;
disparity maps are stored losslessly so roundtrips are bit-exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..errors import FormatError, TruncationError


class PfmImage(NamedTuple):
    data: np.ndarray  # float32 [H, W], top-down row order
    scale: float  # absolute scale from the header
    little_endian: bool


def _read_token_line(stream) -> bytes:
    line = stream.readline()
    if not line:
        raise FormatError("unexpected end of file in PFM header")
    return line.strip()


def read_pfm(path: str | Path) -> PfmImage:
    """Read a grayscale PFM file, correcting rows to top-down order."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = _read_token_line(fh)
        if magic == b"PF":
            raise FormatError(f"{path}: color PFM ('PF') is not supported, expected 'Pf'")
        if magic != b"Pf":
            raise FormatError(f"{path}: bad magic {magic!r}, expected b'Pf'")

        dims = _read_token_line(fh).split()
        if len(dims) != 2:
            raise FormatError(f"{path}: malformed dimension line {dims!r}")
        try:
            width, height = int(dims[0]), int(dims[1])
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer dimensions {dims!r}") from exc
        if width <= 0 or height <= 0:
            raise FormatError(f"{path}: non-positive dimensions {width}x{height}")

        try:
            scale = float(_read_token_line(fh))
        except ValueError as exc:
            raise FormatError(f"{path}: malformed scale line") from exc
        if scale == 0:
            raise FormatError(f"{path}: zero scale is not allowed")
        little_endian = scale < 0

        payload = fh.read()

    expected = width * height * 4
    if len(payload) != expected:
        raise TruncationError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected}"
        )

    dtype = np.dtype("<f4" if little_endian else ">f4")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    # stored bottom-up; flip to conventional top-down
    data = np.flipud(data).astype(np.float32)
    return PfmImage(data=np.ascontiguousarray(data), scale=abs(scale), little_endian=little_endian)


def write_pfm(
    data: np.ndarray,
    path: str | Path,
    little_endian: bool = True,
    scale: float = 1.0,
) -> None:
    """Write a [H, W] float array as grayscale PFM.

    ``read_pfm(write_pfm(x)) == x`` bit-exactly for finite float32 input.
    """
    arr = np.asarray(data, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"expected a [H, W] array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("PFM payload must be finite")
    if scale <= 0:
        raise ValueError("scale must be positive; endianness is passed separately")

    signed_scale = -scale if little_endian else scale
    dtype = np.dtype("<f4" if little_endian else ">f4")
    height, width = arr.shape

    path = Path(path)
    with path.open("wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(f"{signed_scale:g}\n".encode("ascii"))
        fh.write(np.flipud(arr).astype(dtype).tobytes())
