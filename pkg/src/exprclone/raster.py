"""Raster images as numpy arrays, plus a binary PGM/PPM codec.

Images are ``float64`` arrays of shape ``(height, width)`` for gray or
``(height, width, 3)`` for RGB, with samples on the 0-255 scale.  Files are
8-bit; reading is exact and writing rounds half away from zero after
clamping to [0, 255].
"""

import os

import numpy as np

from .errors import DimensionError, ParseError

LUMA = np.array([0.299, 0.587, 0.114])


def as_image(arr) -> np.ndarray:
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if not (img.ndim == 2 or (img.ndim == 3 and img.shape[2] == 3)):
        raise DimensionError(f"unsupported image shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DimensionError("image contains non-finite samples")
    return img


def image_size(img) -> tuple[int, int]:
    """(width, height)"""
    return img.shape[1], img.shape[0]


def luminance(img) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    return img[..., 0] * LUMA[0] + img[..., 1] * LUMA[1] + img[..., 2] * LUMA[2]


def to_uint8(img) -> np.ndarray:
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 255.0)
    return np.floor(img + 0.5).astype(np.uint8)


def _read_token(data, pos):
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ParseError("truncated PNM header")
    return data[start:pos], pos


def decode_pnm(data: bytes) -> np.ndarray:
    magic, pos = _read_token(data, 0)
    if magic not in (b"P5", b"P6"):
        raise ParseError(f"not a binary PGM/PPM file (magic {magic!r})")
    try:
        fields = []
        for _ in range(3):
            tok, pos = _read_token(data, pos)
            fields.append(int(tok))
    except ValueError:
        raise ParseError("non-integer PNM header field") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ParseError(f"invalid PNM size {width}x{height}")
    if not 0 < maxval < 256:
        raise ParseError(f"only 8-bit PNM supported (maxval {maxval})")
    pos += 1  # exactly one whitespace byte before the raster
    channels = 1 if magic == b"P5" else 3
    count = width * height * channels
    raster = data[pos:pos + count]
    if len(raster) != count:
        raise ParseError(f"PNM raster truncated: {len(raster)} of {count} bytes")
    arr = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    if maxval != 255:
        arr = arr * (255.0 / maxval)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return arr.reshape(shape)


def encode_pnm(img) -> bytes:
    img = np.asarray(img)
    u8 = img if img.dtype == np.uint8 else to_uint8(img)
    if u8.ndim == 2:
        magic = b"P5"
    elif u8.ndim == 3 and u8.shape[2] == 3:
        magic = b"P6"
    else:
        raise DimensionError(f"cannot encode image of shape {u8.shape}")
    header = b"%s\n%d %d\n255\n" % (magic, u8.shape[1], u8.shape[0])
    return header + np.ascontiguousarray(u8).tobytes()


def read_image(path) -> np.ndarray:
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".png":
        from PIL import Image

        with Image.open(path) as im:
            mode = "L" if im.mode in ("L", "I", "I;16", "1") else "RGB"
            return np.asarray(im.convert(mode), dtype=np.float64)
    with open(path, "rb") as fh:
        return decode_pnm(fh.read())


def write_image(path, img):
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".png":
        from PIL import Image

        Image.fromarray(to_uint8(img)).save(path)
        return
    with open(path, "wb") as fh:
        fh.write(encode_pnm(img))


def dump_field(path, field):
    """Write a real-valued field as PGM, affinely mapped onto 0-255.

    Returns ``(lo, hi)`` so the caller can report the mapping
    ``pixel = 255 * (value - lo) / (hi - lo)``.
    """
    field = np.asarray(field, dtype=np.float64)
    lo, hi = float(field.min()), float(field.max())
    span = hi - lo
    scaled = np.zeros_like(field) if span == 0 else (field - lo) * (255.0 / span)
    write_image(path, scaled)
    return lo, hi
