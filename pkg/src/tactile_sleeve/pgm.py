"""Binary PGM (P5) depth frame I/O.

Frames are stored with maxval 65535 and big-endian 16-bit samples, one
sample per pixel, value = millimeters, 0 = no data.
"""

from __future__ import annotations

import io

import numpy as np

from .mapping import DepthFrame


class PgmError(ValueError):
    """Malformed or unsupported PGM input."""


def _read_token(stream: io.BufferedIOBase) -> bytes:
    """Next whitespace-delimited header token, skipping '#' comments."""
    token = b""
    while True:
        ch = stream.read(1)
        if ch == b"":
            if token:
                return token
            raise PgmError("truncated PGM header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = stream.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_pgm(source) -> DepthFrame:
    """Read a 16-bit P5 PGM into a DepthFrame.

    `source` is a path or a binary file object.
    """
    if hasattr(source, "read"):
        return _read_pgm_stream(source)
    with open(source, "rb") as f:
        return _read_pgm_stream(f)


def _read_pgm_stream(f) -> DepthFrame:
    magic = _read_token(f)
    if magic != b"P5":
        raise PgmError(f"not a binary PGM (magic {magic!r})")
    try:
        width = int(_read_token(f))
        height = int(_read_token(f))
        maxval = int(_read_token(f))
    except ValueError as exc:
        raise PgmError(f"bad PGM header: {exc}") from None
    if maxval != 65535:
        raise PgmError(f"expected maxval 65535, got {maxval}")
    expected = width * height * 2
    raster = f.read(expected)
    if len(raster) != expected:
        raise PgmError(f"short raster: got {len(raster)} of {expected} bytes")
    depths = np.frombuffer(raster, dtype=">u2").astype(np.uint16)
    return DepthFrame(width, height, depths.reshape(height, width))


def write_pgm(frame: DepthFrame, dest) -> None:
    """Write a DepthFrame as a 16-bit P5 PGM to a path or binary file."""
    header = f"P5\n{frame.width} {frame.height}\n65535\n".encode("ascii")
    raster = frame.depths.astype(">u2").tobytes()
    if hasattr(dest, "write"):
        dest.write(header + raster)
    else:
        with open(dest, "wb") as f:
            f.write(header + raster)


__all__ = ["PgmError", "read_pgm", "write_pgm"]
