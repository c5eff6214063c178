"""Locally weighted mean phase angle maps and their similarity score.

A bank of quadrature log-Gabor filters (zero DC by construction) is applied
in the frequency domain. Summing even (real) and odd (imaginary) responses
over all scales and orientations and taking atan2(sum_even, |sum_odd|) gives
a per-pixel phase angle in [-pi/2, pi/2]: +pi/2 marks a bright line, -pi/2 a
dark line, 0 a step. Feature-type agreement between the HDR and LDR maps,
scored per RGB channel and fused with the Y weights, is the L component.
"""

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ImageTooSmall
from .image import LUMA_WEIGHTS, HdrImage, LdrImage, LuminancePlane

_MIN_DIM = 8


@dataclass(frozen=True)
class FilterBankParams:
    """Log-Gabor bank geometry.

    Wavelengths start at min_wavelength pixels and grow by scale_multiplier
    per scale; sigma_on_f sets the radial log-bandwidth; the angular Gaussian
    spread is angular_spread_factor times the orientation spacing.
    """

    n_scales: int = 4
    n_orientations: int = 4
    min_wavelength: float = 3.0
    scale_multiplier: float = 2.1
    sigma_on_f: float = 0.55
    angular_spread_factor: float = 1.2

    def __post_init__(self):
        if self.n_scales < 1 or self.n_orientations < 1:
            raise ValueError("need at least one scale and one orientation")
        if self.min_wavelength < 2:
            raise ValueError("min_wavelength below 2 px is beyond Nyquist")
        if self.scale_multiplier <= 1:
            raise ValueError("scale_multiplier must exceed 1")
        if not 0 < self.sigma_on_f < 1:
            raise ValueError("sigma_on_f must lie in (0, 1)")


@dataclass(frozen=True)
class PhaseParams:
    """Phase pathway configuration.

    hdr_raw_weight blends the linearly-normalized HDR channel against its
    log(1 + x)-normalized version before filtering (the LDR channel is used
    as stored). comparison picks the per-pixel agreement rule: "sign"
    (feature-type match) or "cosine" (graded phase-difference score).
    Responses whose amplitude falls below amplitude_floor times the image
    maximum are treated as no feature (phase 0).
    """

    bank: FilterBankParams = field(default_factory=FilterBankParams)
    hdr_raw_weight: float = 0.5
    comparison: str = "sign"
    amplitude_floor: float = 1e-8

    def __post_init__(self):
        if not 0.0 <= self.hdr_raw_weight <= 1.0:
            raise ValueError("hdr_raw_weight must lie in [0, 1]")
        if self.comparison not in ("sign", "cosine"):
            raise ValueError("comparison must be 'sign' or 'cosine'")
        if self.amplitude_floor < 0:
            raise ValueError("amplitude_floor must be nonnegative")


class PhaseMap:
    """Per-pixel phase angles in [-pi/2, pi/2]; sign encodes dark vs bright."""

    def __init__(self, ph):
        arr = np.ascontiguousarray(ph, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected (h, w) phase data, got {arr.shape}")
        arr.setflags(write=False)
        self.ph = arr

    @property
    def height(self):
        return self.ph.shape[0]

    @property
    def width(self):
        return self.ph.shape[1]


@dataclass(frozen=True)
class PhaseScore:
    q_r: float
    q_g: float
    q_b: float
    l: float


def log_gabor_radial(radius, f0, sigma_on_f):
    """Radial transfer exp(-(log(f/f0))^2 / (2 log(sigma_on_f)^2)); peak 1 at f0."""
    r = np.asarray(radius, dtype=np.float64)
    with np.errstate(divide="ignore"):
        lr = np.log(r / f0)
    return np.exp(-(lr * lr) / (2.0 * np.log(sigma_on_f) ** 2))


@functools.lru_cache(maxsize=16)
def _bank_arrays(height, width, params):
    fy = np.fft.fftfreq(height)
    fx = np.fft.fftfreq(width)
    radius = np.hypot(fy[:, None], fx[None, :])
    radius[0, 0] = 1.0  # placeholder; the DC bin is zeroed below
    theta = np.arctan2(-fy[:, None] + np.zeros_like(fx[None, :]), fx[None, :] + np.zeros_like(fy[:, None]))
    sin_t = np.sin(theta)
    cos_t = np.cos(theta)
    sigma_theta = params.angular_spread_factor * np.pi / params.n_orientations
    filters = []
    for s in range(params.n_scales):
        wavelength = params.min_wavelength * params.scale_multiplier**s
        lg = log_gabor_radial(radius, 1.0 / wavelength, params.sigma_on_f)
        lg[0, 0] = 0.0
        for o in range(params.n_orientations):
            angle = o * np.pi / params.n_orientations
            ds = sin_t * np.cos(angle) - cos_t * np.sin(angle)
            dc = cos_t * np.cos(angle) + sin_t * np.sin(angle)
            dtheta = np.abs(np.arctan2(ds, dc))
            spread = np.exp(-(dtheta * dtheta) / (2.0 * sigma_theta * sigma_theta))
            filt = lg * spread
            filt.setflags(write=False)
            filters.append(filt)
    return tuple(filters)


@functools.lru_cache(maxsize=16)
def _bank_total(height, width, params):
    total = np.zeros((height, width))
    for filt in _bank_arrays(height, width, params):
        total += filt
    total.setflags(write=False)
    return total


def log_gabor_bank(height, width, params=FilterBankParams()):
    """Frequency-domain quadrature filters, scale-major ordering.

    Each filter is real and one-sided in orientation, so filtering yields the
    even response in the real part and the odd response in the imaginary
    part. Every filter has exactly zero DC. Cached per (size, params).
    """
    if height < _MIN_DIM or width < _MIN_DIM:
        raise ImageTooSmall(f"need at least {_MIN_DIM}x{_MIN_DIM}, got {height}x{width}")
    return _bank_arrays(height, width, params)


def lwmpa(plane, params=PhaseParams()):
    """Locally weighted mean phase angle map of one plane.

    atan2 of the summed even responses against the magnitude of the summed
    odd responses, so values stay in [-pi/2, pi/2]; pixels with no response
    (flat image regions) get phase 0.
    """
    data = plane.data if isinstance(plane, LuminancePlane) else np.asarray(plane, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("lwmpa expects a single plane")
    h, w = data.shape
    if h < _MIN_DIM or w < _MIN_DIM:
        raise ImageTooSmall(f"need at least {_MIN_DIM}x{_MIN_DIM}, got {h}x{w}")
    total = _bank_total(h, w, params.bank)
    resp = np.fft.ifft2(np.fft.fft2(data) * total)
    even = resp.real
    odd = resp.imag
    amp = np.hypot(even, odd)
    floor = params.amplitude_floor * amp.max()
    ph = np.where(amp > floor, np.arctan2(even, np.abs(odd)), 0.0)
    return PhaseMap(ph)


def phase_map_to_u8(pmap):
    """Map phase values linearly from [-pi/2, pi/2] onto [0, 255] for export."""
    scaled = (pmap.ph + np.pi / 2.0) / np.pi * 255.0
    return np.clip(np.rint(scaled), 0, 255).astype(np.uint8)


def _normalize01(a):
    lo = a.min()
    hi = a.max()
    if hi == lo:
        return np.zeros_like(a)
    return (a - lo) / (hi - lo)


def hdr_phase_input(chan, params=PhaseParams()):
    """Blend of linearly- and log(1+x)-normalized views of an HDR channel."""
    c = np.asarray(chan, dtype=np.float64)
    wr = params.hdr_raw_weight
    if wr == 1.0:
        return _normalize01(c)
    blended = (1.0 - wr) * _normalize01(np.log1p(c))
    if wr > 0.0:
        blended = blended + wr * _normalize01(c)
    return blended


def channel_phase_similarity(hdr_chan, ldr_chan, params=PhaseParams()):
    """Fraction of pixels whose HDR and LDR phase maps mark the same feature.

    Under the "sign" rule, a pixel agrees when the two maps have the same
    phase sign (0 only matches 0). The "cosine" rule scores
    (1 + cos(ph_h - ph_l)) / 2 instead.
    """
    hc = np.asarray(hdr_chan, dtype=np.float64)
    lc = np.asarray(ldr_chan, dtype=np.float64)
    if hc.shape != lc.shape:
        raise DimensionMismatch(f"channel shapes differ: {hc.shape} vs {lc.shape}")
    ph_h = lwmpa(hdr_phase_input(hc, params), params).ph
    ph_l = lwmpa(lc, params).ph
    if params.comparison == "sign":
        return float(np.mean(np.sign(ph_h) == np.sign(ph_l)))
    return float(np.mean(0.5 * (1.0 + np.cos(ph_h - ph_l))))


def phase_component(hdr, ldr, params=PhaseParams()):
    """Per-channel phase similarity fused with the RGB-to-Y weights."""
    if not isinstance(hdr, HdrImage) or not isinstance(ldr, LdrImage):
        raise TypeError("phase_component expects (HdrImage, LdrImage)")
    if (hdr.height, hdr.width) != (ldr.height, ldr.width):
        raise DimensionMismatch(
            f"image sizes differ: {hdr.height}x{hdr.width} vs {ldr.height}x{ldr.width}"
        )
    q = [
        channel_phase_similarity(hdr.channel(c), ldr.channel(c), params)
        for c in range(3)
    ]
    wr, wg, wb = LUMA_WEIGHTS
    return PhaseScore(q_r=q[0], q_g=q[1], q_b=q[2], l=wr * q[0] + wg * q[1] + wb * q[2])
