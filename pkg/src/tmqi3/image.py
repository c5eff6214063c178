"""Raster containers and shared color/range math.

Images are immutable after construction: the backing arrays are marked
read-only so they can be shared freely across threads.
"""

import numpy as np

from .errors import ConstantImage

# RGB -> Y weights of the YUV model. Correctly rounded, they sum to 1.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _as_readonly(arr):
    arr.setflags(write=False)
    return arr


class HdrImage:
    """Linear-radiance RGB raster, float64, unbounded above.

    Parameters
    ----------
    data : array_like
      Shape (height, width, 3), finite and nonnegative.
    """

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) data, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.isfinite(arr).all():
            raise ValueError("HDR samples must be finite")
        if (arr < 0).any():
            raise ValueError("HDR samples must be nonnegative")
        self.data = _as_readonly(arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def channel(self, idx):
        """Return one channel as a float64 (h, w) array."""
        return self.data[:, :, idx]


class LdrImage:
    """8-bit-per-channel RGB raster; dynamic range 255 by construction."""

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) data, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.dtype != np.uint8:
            if (arr < 0).any() or (arr > 255).any():
                raise ValueError("LDR samples must lie in [0, 255]")
            if not np.array_equal(arr, np.round(arr)):
                raise ValueError("LDR samples must be integers")
            arr = arr.astype(np.uint8)
        self.data = _as_readonly(np.ascontiguousarray(arr))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    def channel(self, idx):
        """Return one channel as a float64 (h, w) array."""
        return self.data[:, :, idx].astype(np.float64)


class LuminancePlane:
    """Single-channel float64 raster derived from an image."""

    def __init__(self, data):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected (h, w) data, got shape {arr.shape}")
        self.data = _as_readonly(arr)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


def luminance(img):
    """Per-pixel Y = 0.299 R + 0.587 G + 0.114 B.

    Accepts either an :class:`HdrImage` or an :class:`LdrImage`; dimensions
    are preserved. For LDR input the output stays within [0, 255].
    """
    rgb = img.data.astype(np.float64, copy=False)
    wr, wg, wb = LUMA_WEIGHTS
    y = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    return LuminancePlane(y)


def to_grayscale_f64(img):
    """Luminance specialized to LDR images; values in [0, 255]."""
    if not isinstance(img, LdrImage):
        raise TypeError("to_grayscale_f64 expects an LdrImage")
    return luminance(img)


def normalize_hdr_luminance(plane):
    """Affine map of [min, max] onto [0, 255].

    Aligns HDR luminance with the 8-bit code-value scale so local statistics
    of the two signals are comparable. Monotone; endpoints map exactly.

    Raises
    ------
    ConstantImage
      If the plane has a single distinct value (degenerate reference).
    """
    v = plane.data
    lo = v.min()
    hi = v.max()
    if hi == lo:
        raise ConstantImage("plane has no dynamic range to normalize")
    return LuminancePlane((v - lo) / (hi - lo) * 255.0)
