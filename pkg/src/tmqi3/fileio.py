"""PFM/PPM/PNG rasters and the dataset manifest.

The manifest is the sole dataset entry point: a JSON document listing sets of
one HDR reference plus the tone-mapped LDR renderings with their subjective
scores. No directory scanning.
"""

import io
import json
import warnings
from dataclasses import dataclass

import numpy as np
from PIL import Image as PilImage

from .errors import (
    BadHeader,
    BadMagic,
    BitDepthUnsupported,
    ManifestInvalid,
    MaxvalUnsupported,
)
from .image import HdrImage, LdrImage

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


# --- PFM ---------------------------------------------------------------------

def _pfm_token(stream):
    # Tokens are separated by single whitespace bytes per the PFM convention.
    tok = b""
    while True:
        c = stream.read(1)
        if c == b"":
            raise BadHeader("PFM header ended early")
        if c in b" \t\r\n":
            if tok:
                return tok
            continue
        tok += c


def read_pfm(data):
    """Parse PFM bytes into an :class:`HdrImage` (grayscale is replicated)."""
    stream = io.BytesIO(data)
    magic = stream.read(2)
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise BadMagic(f"not a PFM stream (magic {magic!r})")
    try:
        w = int(_pfm_token(stream))
        h = int(_pfm_token(stream))
        scale = float(_pfm_token(stream))
    except ValueError:
        raise BadHeader("non-numeric PFM dimensions or scale") from None
    if w < 1 or h < 1 or scale == 0.0:
        raise BadHeader(f"bad PFM geometry {w}x{h} scale {scale}")
    dtype = "<f4" if scale < 0 else ">f4"
    count = w * h * channels
    payload = stream.read(4 * count)
    if len(payload) != 4 * count:
        raise BadHeader("PFM payload shorter than declared dimensions")
    samples = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    rows = samples.reshape(h, w, channels)[::-1]  # PFM stores rows bottom-up
    if channels == 1:
        rows = np.repeat(rows, 3, axis=2)
    return HdrImage(rows)


def write_pfm(img):
    """Serialize an :class:`HdrImage` to little-endian PFM bytes."""
    h, w = img.height, img.width
    head = f"PF\n{w} {h}\n-1.0\n".encode("ascii")
    body = img.data[::-1].astype("<f4").tobytes()
    return head + body


# --- PPM / PNG ----------------------------------------------------------------

def _ppm_token(stream):
    tok = b""
    while True:
        c = stream.read(1)
        if c == b"":
            raise BadHeader("PPM header ended early")
        if c == b"#":  # comment runs to end of line
            while c not in (b"", b"\n"):
                c = stream.read(1)
            continue
        if c in b" \t\r\n":
            if tok:
                return tok
            continue
        tok += c


def read_ppm(data):
    """Parse binary PPM (P6, maxval 255) into an :class:`LdrImage`."""
    stream = io.BytesIO(data)
    if stream.read(2) != b"P6":
        raise BadMagic("not a binary PPM (P6) stream")
    try:
        w = int(_ppm_token(stream))
        h = int(_ppm_token(stream))
        maxval = int(_ppm_token(stream))
    except ValueError:
        raise BadHeader("non-numeric PPM header fields") from None
    if w < 1 or h < 1:
        raise BadHeader(f"degenerate PPM size {w}x{h}")
    if maxval != 255:
        raise MaxvalUnsupported(f"PPM maxval must be 255, got {maxval}")
    payload = stream.read(w * h * 3)
    if len(payload) != w * h * 3:
        raise BadHeader("PPM payload shorter than declared dimensions")
    return LdrImage(np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3))


def write_ppm(img):
    """Serialize an :class:`LdrImage` to binary PPM bytes."""
    head = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return head + img.data.tobytes()


def read_png(data):
    """Parse an 8-bit RGB PNG into an :class:`LdrImage`.

    Alpha is stripped with a warning; bit depths above 8 are rejected.
    """
    if data[:8] != _PNG_SIGNATURE:
        raise BadMagic("not a PNG stream")
    if len(data) < 26:
        raise BadHeader("PNG stream too short for an IHDR chunk")
    bit_depth = data[24]
    if bit_depth > 8:
        raise BitDepthUnsupported(f"PNG bit depth {bit_depth} > 8 unsupported")
    with PilImage.open(io.BytesIO(data)) as im:
        if im.mode in ("RGBA", "LA", "PA"):
            warnings.warn("PNG alpha channel stripped", stacklevel=2)
        if im.mode != "RGB":
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.uint8)
    return LdrImage(arr)


def write_png(img):
    """Serialize an :class:`LdrImage` (or a uint8 (h, w) plane) to PNG bytes."""
    arr = img.data if isinstance(img, LdrImage) else np.asarray(img, dtype=np.uint8)
    buf = io.BytesIO()
    PilImage.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


# --- format sniffing -----------------------------------------------------------

def read_hdr_image(data):
    """Decode HDR bytes by signature: Radiance (#?...) or PFM (PF/Pf)."""
    from .radiance import read_radiance_hdr

    if data[:2] == b"#?":
        return read_radiance_hdr(data)
    if data[:2] in (b"PF", b"Pf"):
        return read_pfm(data)
    raise BadMagic("unrecognized HDR container (expected Radiance or PFM)")


def read_ldr_image(data):
    """Decode LDR bytes by signature: PPM (P6) or PNG."""
    if data[:2] == b"P6":
        return read_ppm(data)
    if data[:8] == _PNG_SIGNATURE:
        return read_png(data)
    raise BadMagic("unrecognized LDR container (expected P6 PPM or PNG)")


read_ldr = read_ldr_image


# --- dataset manifest -----------------------------------------------------------

@dataclass(frozen=True)
class LdrEntry:
    path: str
    subjective_score: float


@dataclass(frozen=True)
class ManifestSet:
    set_id: int
    hdr_path: str
    ldr_entries: tuple


@dataclass(frozen=True)
class DatasetManifest:
    sets: tuple


def load_manifest(data, source="<manifest>"):
    """Parse and validate manifest JSON bytes into a :class:`DatasetManifest`.

    Every set needs at least two LDR entries (rank correlation is undefined
    below that) and subjective scores must lie in [1, 8].
    """
    try:
        doc = json.loads(data.decode("utf-8") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestInvalid(source, f"not valid UTF-8 JSON: {exc}") from None
    if not isinstance(doc, dict) or "sets" not in doc:
        raise ManifestInvalid(source, "top-level object must contain 'sets'")
    raw_sets = doc["sets"]
    if not isinstance(raw_sets, list) or len(raw_sets) == 0:
        raise ManifestInvalid(source, "'sets' must be a non-empty list")
    sets = []
    for k, raw in enumerate(raw_sets):
        where = f"sets[{k}]"
        if not isinstance(raw, dict):
            raise ManifestInvalid(source, f"{where} must be an object")
        try:
            set_id = int(raw["set_id"])
            hdr_path = str(raw["hdr_path"])
            entries = raw["ldr_entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestInvalid(source, f"{where}: {exc!r}") from None
        if not isinstance(entries, list) or len(entries) < 2:
            raise ManifestInvalid(
                source, f"{where}: TooFewItems: need >= 2 ldr_entries"
            )
        ldr_entries = []
        for j, e in enumerate(entries):
            try:
                path = str(e["path"])
                score = float(e["subjective_score"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestInvalid(
                    source, f"{where}.ldr_entries[{j}]: {exc!r}"
                ) from None
            if not 1.0 <= score <= 8.0:
                raise ManifestInvalid(
                    source,
                    f"{where}.ldr_entries[{j}]: subjective_score {score} "
                    "outside [1, 8]",
                )
            ldr_entries.append(LdrEntry(path=path, subjective_score=score))
        sets.append(
            ManifestSet(
                set_id=set_id, hdr_path=hdr_path, ldr_entries=tuple(ldr_entries)
            )
        )
    return DatasetManifest(sets=tuple(sets))
