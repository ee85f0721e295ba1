"""Binary PGM (P5) / PPM (P6) reading and writing.

8-bit and 16-bit (big-endian) samples are supported. PNG goes through
Pillow when it is installed; it is not needed for PNM files.
"""

import os

import numpy as np


class ImageFormatError(ValueError):
    """Raised for unreadable, truncated or unsupported image files."""


def _tokens(data, count, pos):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PNM header")
        out.append(data[start:pos])
    return out, pos


def decode_pnm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"unsupported PNM magic {magic!r}")
    try:
        (w, h, maxval), pos = _tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ImageFormatError(f"malformed PNM header: {exc}") from None
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid PNM geometry {w}x{h} maxval {maxval}")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    nbytes = w * h * channels * dtype.itemsize
    raster = data[pos:pos + nbytes]
    if len(raster) != nbytes:
        raise ImageFormatError(f"truncated raster: expected {nbytes} bytes, got {len(raster)}")
    arr = np.frombuffer(raster, dtype=dtype)
    if maxval > 255:
        arr = arr.astype(np.uint16)
    else:
        arr = arr.copy()
    if channels == 3:
        return arr.reshape(h, w, 3)
    return arr.reshape(h, w)


def encode_pnm(arr) -> bytes:
    arr = np.asarray(arr)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8) * 255
    if arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    elif arr.ndim == 2:
        magic = b"P5"
    else:
        raise ValueError(f"cannot encode array of shape {arr.shape} as PNM")
    if arr.dtype == np.uint8:
        maxval, raster = 255, arr.tobytes()
    elif arr.dtype == np.uint16:
        maxval, raster = 65535, arr.astype(">u2").tobytes()
    else:
        raise ValueError(f"PNM encoding needs uint8 or uint16, got {arr.dtype}")
    h, w = arr.shape[:2]
    return b"%s\n%d %d\n%d\n" % (magic, w, h, maxval) + raster


def read_image(path) -> np.ndarray:
    """Load a PGM/PPM (or PNG, via Pillow) as a numpy array."""
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc.strerror}") from None
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    return decode_pnm(data)


def _read_png(path):
    try:
        from PIL import Image
    except ImportError:
        raise ImageFormatError("PNG input needs Pillow (pip install pillow)") from None
    with Image.open(path) as im:
        if im.mode in ("L", "1"):
            return np.asarray(im.convert("L"))
        return np.asarray(im.convert("RGB"))


def write_image(path, arr):
    with open(path, "wb") as fh:
        fh.write(encode_pnm(arr))
