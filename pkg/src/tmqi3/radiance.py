"""Radiance RGBE (.hdr) codec: shared-exponent pixels, flat or RLE scanlines.

Decode convention: channel = (mantissa + 0.5) * 2**(exponent - 136) when the
exponent byte is nonzero, else exact black. The +0.5 mantissa center halves
the worst-case quantization error and keeps goldens bit-stable.
"""

import io

import numpy as np

from .errors import (
    BadHeader,
    BadMagic,
    BadRleRun,
    NonFiniteSample,
    TruncatedScanline,
    UnsupportedOrientation,
)
from .image import HdrImage

_MAGICS = (b"#?RADIANCE", b"#?RGBE")

# New-style RLE is only defined for widths in [8, 32767].
_RLE_MIN_WIDTH = 8
_RLE_MAX_WIDTH = 32767


def decode_rgbe(codes):
    """Decode an (..., 4) uint8 RGBE array to (..., 3) float64 radiance."""
    codes = np.asarray(codes, dtype=np.uint8)
    m = codes[..., :3].astype(np.float64)
    e = codes[..., 3].astype(np.int64)
    out = np.ldexp(m + 0.5, (e - 136)[..., None])
    out[e == 0] = 0.0
    return out


def encode_rgbe(rgb):
    """Encode (..., 3) float64 radiance to (..., 4) uint8 RGBE.

    The shared exponent is taken from the largest channel via frexp, so the
    dominant channel keeps a mantissa in [128, 255]. Pixels whose maximum
    channel is zero (or denormally small) become the exact-black code e = 0.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if not np.isfinite(rgb).all() or (rgb < 0).any():
        raise NonFiniteSample("RGBE encoding requires finite nonnegative samples")
    maxc = rgb.max(axis=-1)
    _, exp = np.frexp(maxc)
    ebyte = exp + 128
    black = (maxc <= 0.0) | (ebyte < 1)
    ebyte = np.clip(ebyte, 1, 255)
    mant = np.floor(np.ldexp(rgb, (136 - ebyte)[..., None]))
    mant = np.clip(mant, 0, 255)
    out = np.empty(rgb.shape[:-1] + (4,), dtype=np.uint8)
    out[..., :3] = mant
    out[..., 3] = ebyte
    out[black] = 0
    return out


def _read_header(stream):
    magic = stream.readline().rstrip(b"\r\n")
    if magic not in _MAGICS:
        raise BadMagic(f"not a Radiance stream (magic {magic[:16]!r})")
    while True:
        line = stream.readline()
        if line == b"":
            raise BadHeader("header ended before the blank separator line")
        if line.strip() == b"":
            break
        # FORMAT=, EXPOSURE=, comments: metadata we do not act on.
    res = stream.readline().rstrip(b"\r\n").decode("ascii", "replace")
    parts = res.split()
    if len(parts) != 4:
        raise BadHeader(f"malformed resolution line {res!r}")
    if parts[0] != "-Y" or parts[2] != "+X":
        raise UnsupportedOrientation(f"only '-Y h +X w' is supported, got {res!r}")
    try:
        h, w = int(parts[1]), int(parts[3])
    except ValueError:
        raise BadHeader(f"non-numeric resolution line {res!r}") from None
    if h < 1 or w < 1:
        raise BadHeader(f"degenerate resolution {res!r}")
    return w, h


def _read_rle_components(stream, width):
    row = np.empty((width, 4), dtype=np.uint8)
    for c in range(4):
        i = 0
        while i < width:
            head = stream.read(1)
            if len(head) != 1:
                raise TruncatedScanline("EOF inside an RLE scanline")
            n = head[0]
            if n > 128:
                count = n - 128
                if i + count > width:
                    raise BadRleRun(f"run of {count} overflows width {width}")
                value = stream.read(1)
                if len(value) != 1:
                    raise TruncatedScanline("EOF inside an RLE run")
                row[i : i + count, c] = value[0]
            else:
                count = n
                if count == 0:
                    raise BadRleRun("zero-length literal packet")
                if i + count > width:
                    raise BadRleRun(f"literal of {count} overflows width {width}")
                data = stream.read(count)
                if len(data) != count:
                    raise TruncatedScanline("EOF inside an RLE literal")
                row[i : i + count, c] = np.frombuffer(data, dtype=np.uint8)
            i += count
    return row


def _read_scanline(stream, width):
    head = stream.read(4)
    if len(head) == 0:
        raise TruncatedScanline("EOF where a scanline was expected")
    if (
        len(head) == 4
        and head[0] == 2
        and head[1] == 2
        and head[2] & 0x80 == 0
        and (head[2] << 8) + head[3] == width
    ):
        return _read_rle_components(stream, width)
    rest = stream.read(width * 4 - len(head))
    if len(head) + len(rest) != width * 4:
        raise TruncatedScanline("EOF inside a flat scanline")
    return np.frombuffer(head + rest, dtype=np.uint8).reshape(width, 4)


def read_radiance_hdr(data):
    """Parse a Radiance .hdr byte stream into an :class:`HdrImage`."""
    stream = io.BytesIO(data)
    w, h = _read_header(stream)
    codes = np.empty((h, w, 4), dtype=np.uint8)
    for y in range(h):
        codes[y] = _read_scanline(stream, w)
    return HdrImage(decode_rgbe(codes))


def _rle_encode_component(values):
    out = bytearray()
    n = len(values)
    i = 0
    while i < n:
        run = 1
        while i + run < n and run < 127 and values[i + run] == values[i]:
            run += 1
        if run >= 4:
            out.append(128 + run)
            out.append(values[i])
            i += run
        else:
            # Literal chunk: extend until the next run of >= 4 or 128 bytes.
            j = i
            while j < n and j - i < 128:
                k = 1
                while j + k < n and k < 4 and values[j + k] == values[j]:
                    k += 1
                if k >= 4:
                    break
                j += k
            j = min(j, i + 128, n)
            out.append(j - i)
            out.extend(values[i:j])
            i = j
    return bytes(out)


def write_radiance_hdr(img, rle=None):
    """Serialize an :class:`HdrImage` to Radiance .hdr bytes.

    Parameters
    ----------
    img : HdrImage
    rle : bool or None
      None picks RLE whenever the width allows it; False forces flat
      scanlines; True forces RLE and raises ValueError for widths the
      format cannot RLE-encode.
    """
    data = img.data
    if not np.isfinite(data).all() or (data < 0).any():
        raise NonFiniteSample("cannot encode non-finite or negative samples")
    h, w = img.height, img.width
    rle_ok = _RLE_MIN_WIDTH <= w <= _RLE_MAX_WIDTH
    if rle is None:
        rle = rle_ok
    elif rle and not rle_ok:
        raise ValueError(f"RLE scanlines require width in [8, 32767], got {w}")
    codes = encode_rgbe(data)
    out = bytearray()
    out.extend(b"#?RADIANCE\n")
    out.extend(b"FORMAT=32-bit_rle_rgbe\n")
    out.extend(b"\n")
    out.extend(f"-Y {h} +X {w}\n".encode("ascii"))
    for y in range(h):
        row = codes[y]
        if rle:
            out.extend(bytes((2, 2, (w >> 8) & 0x7F, w & 0xFF)))
            for c in range(4):
                out.extend(_rle_encode_component(row[:, c].tobytes()))
        else:
            out.extend(row.tobytes())
    return bytes(out)
