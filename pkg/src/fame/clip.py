"""Pixel volumes, the FAMECLIP container and PNM interchange.

A :class:`Clip` holds intensities in ``[0, 1]`` laid out ``(C, T, H, W)``.
On disk a clip is a 26-byte header followed by the raw payload::

    magic   8 bytes  b"FAMECLIP"
    version u8       1
    dtype   u8       0 = uint8 pixels, 1 = float32 pixels (little-endian)
    C T H W u32 x 4  little-endian
"""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ClipFormatError, ClipLengthError, ClipRangeError, ShapeError

MAGIC = b"FAMECLIP"
VERSION = 1
DTYPE_UINT8 = 0
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<8sBB4I")
HEADER_SIZE = _HEADER.size


def _check_range(data: np.ndarray) -> None:
    if not np.all(np.isfinite(data)):
        raise ClipRangeError("pixel values must be finite")
    if data.size and (data.min() < 0.0 or data.max() > 1.0):
        raise ClipRangeError(
            f"pixel values must lie in [0, 1], got [{data.min()}, {data.max()}]"
        )


@dataclass(frozen=True, eq=False)
class Clip:
    """A ``(C, T, H, W)`` float32 volume with values in ``[0, 1]``.

    The array is copied on construction and marked read-only.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float32, order="C", copy=True)
        if data.ndim != 4:
            raise ShapeError(f"clip must be 4-D (C, T, H, W), got shape {data.shape}")
        if data.shape[0] not in (1, 3):
            raise ShapeError(f"clip must have 1 or 3 channels, got {data.shape[0]}")
        if min(data.shape[1:]) < 1:
            raise ShapeError(f"clip dimensions must be positive, got {data.shape}")
        _check_range(data)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def C(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1]

    @property
    def H(self) -> int:
        return self.data.shape[2]

    @property
    def W(self) -> int:
        return self.data.shape[3]

    def __eq__(self, other):
        if not isinstance(other, Clip):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Frame:
    """A single ``(C, H, W)`` image with values in ``[0, 1]``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 3 or data.shape[0] not in (1, 3):
            raise ShapeError(f"frame must be (C, H, W) with C in {{1, 3}}, got {data.shape}")
        _check_range(data)
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def C(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> int:
        return self.data.shape[1]

    @property
    def W(self) -> int:
        return self.data.shape[2]


def as_clip(x) -> Clip:
    return x if isinstance(x, Clip) else Clip(x)


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Map ``[0, 1]`` reals to bytes by ``round(v * 255)``, halves rounding up."""
    return np.floor(np.asarray(values, dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)


def temporal_average(clip: Clip) -> Frame:
    """Mean over the time axis; the clip viewed as one image."""
    return Frame(np.asarray(clip.data, dtype=np.float64).mean(axis=1))


# -- FAMECLIP container ------------------------------------------------------

def _atomic_write(path, payload: bytes) -> None:
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=".tmp-", suffix=path.suffix)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}", str(path)) from e


def encode_clip(clip: Clip, dtype: int = DTYPE_FLOAT32) -> bytes:
    """Serialize a clip to FAMECLIP bytes."""
    if dtype == DTYPE_UINT8:
        payload = quantize_u8(clip.data).tobytes()
    elif dtype == DTYPE_FLOAT32:
        payload = clip.data.astype("<f4").tobytes()
    else:
        raise ValueError(f"unknown storage dtype {dtype!r}; expected 0 or 1")
    return _HEADER.pack(MAGIC, VERSION, dtype, *clip.shape) + payload


def decode_clip(raw: bytes, path=None) -> Clip:
    """Parse FAMECLIP bytes; see :func:`load_clip` for the error contract."""
    where = f"{path}: " if path else ""
    if len(raw) < HEADER_SIZE:
        raise ClipFormatError(
            f"{where}truncated header: need {HEADER_SIZE} bytes, got {len(raw)}", len(raw)
        )
    magic, version, dtype, c, t, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ClipFormatError(f"{where}bad magic {magic!r}", 0)
    if version != VERSION:
        raise ClipFormatError(f"{where}unsupported version {version}", 8)
    if dtype not in (DTYPE_UINT8, DTYPE_FLOAT32):
        raise ClipFormatError(f"{where}unknown dtype {dtype}", 9)
    if c not in (1, 3):
        raise ClipFormatError(f"{where}channel count must be 1 or 3, got {c}", 10)
    for offset, name, value in ((14, "T", t), (18, "H", h), (22, "W", w)):
        if value < 1:
            raise ClipFormatError(f"{where}{name} must be positive", offset)

    n = c * t * h * w
    itemsize = 1 if dtype == DTYPE_UINT8 else 4
    payload = memoryview(raw)[HEADER_SIZE:]
    if len(payload) != n * itemsize:
        raise ClipLengthError(n * itemsize, len(payload), path)

    if dtype == DTYPE_UINT8:
        values = np.frombuffer(payload, dtype=np.uint8).astype(np.float32) / np.float32(255)
    else:
        values = np.frombuffer(payload, dtype="<f4").astype(np.float32)
        try:
            _check_range(values)
        except ClipRangeError as e:
            raise ClipRangeError(f"{where}{e}") from None
    return Clip(values.reshape(c, t, h, w))


def load_clip(path) -> Clip:
    """Read a FAMECLIP file.

    Raises :class:`ClipFormatError` (with byte offset) on a bad header,
    :class:`ClipLengthError` when the payload size disagrees with the header
    and :class:`ClipRangeError` for float payloads outside ``[0, 1]``.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    return decode_clip(raw, path)


def save_clip(clip: Clip, path, dtype: int = DTYPE_FLOAT32) -> None:
    """Write *clip* to *path*; ``dtype=0`` quantizes by ``round(v * 255)``."""
    _atomic_write(path, encode_clip(as_clip(clip), dtype))


# -- PNM interchange ---------------------------------------------------------

def _parse_pnm(raw: bytes, magic: bytes, path=None):
    where = f"{path}: " if path else ""
    if raw[:2] != magic:
        raise ClipFormatError(f"{where}expected {magic.decode()} image, got {raw[:2]!r}", 0)
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise ClipFormatError(f"{where}malformed header", pos)
        fields.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos:pos + 1].isspace():
        raise ClipFormatError(f"{where}missing whitespace after header", pos)
    pos += 1
    width, height, maxval = fields
    if maxval != 255:
        raise ClipFormatError(f"{where}maxval must be 255, got {maxval}", pos - 1)
    if width < 1 or height < 1:
        raise ClipFormatError(f"{where}image dimensions must be positive", 2)
    return width, height, raw[pos:]


def read_ppm(path) -> np.ndarray:
    """Read a P6 image as an ``(H, W, 3)`` uint8 array."""
    raw = Path(path).read_bytes()
    w, h, payload = _parse_pnm(raw, b"P6", path)
    if len(payload) < w * h * 3:
        raise ClipLengthError(w * h * 3, len(payload), path)
    return np.frombuffer(payload[: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def read_pgm(path) -> np.ndarray:
    """Read a P5 image as an ``(H, W)`` uint8 array."""
    raw = Path(path).read_bytes()
    w, h, payload = _parse_pnm(raw, b"P5", path)
    if len(payload) < w * h:
        raise ClipLengthError(w * h, len(payload), path)
    return np.frombuffer(payload[: w * h], dtype=np.uint8).reshape(h, w)


def write_ppm(path, pixels: np.ndarray) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    _atomic_write(path, b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def write_pgm(path, pixels: np.ndarray) -> None:
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    _atomic_write(path, b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def import_frames(paths: Sequence) -> Clip:
    """Stack P6 images into an RGB clip, one frame per path."""
    paths = list(paths)
    if not paths:
        raise ShapeError("import_frames needs at least one image")
    frames = []
    for index, p in enumerate(paths):
        img = read_ppm(p)
        if frames and img.shape != frames[0].shape:
            h0, w0 = frames[0].shape[:2]
            raise ShapeError(
                f"frame {index} ({p}) is {img.shape[0]}x{img.shape[1]}, "
                f"expected {h0}x{w0} like frame 0"
            )
        frames.append(img)
    stack = np.stack(frames).astype(np.float32) / np.float32(255)  # (T, H, W, 3)
    return Clip(stack.transpose(3, 0, 1, 2))


def export_frames(clip: Clip, paths: Sequence) -> None:
    """Write each frame of an RGB clip as a P6 image."""
    paths = list(paths)
    if clip.C != 3:
        raise ShapeError(f"P6 export needs 3 channels, got {clip.C}")
    if len(paths) != clip.T:
        raise ShapeError(f"got {len(paths)} paths for {clip.T} frames")
    pixels = quantize_u8(clip.data).transpose(1, 2, 3, 0)
    for p, frame in zip(paths, pixels):
        write_ppm(p, frame)
