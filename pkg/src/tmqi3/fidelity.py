"""Structural fidelity between a normalized HDR plane and an LDR plane.

A Gaussian-weighted window slides over both planes (stride 1, valid region
only). Within each window the raw local standard deviations are passed
through a normal-CDF visibility mapping before the SSIM-style comparison, so
contrast below the visibility threshold tau contributes little. The mean of
the per-window scores is the scalar fidelity S.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve, convolve2d
from scipy.special import ndtr

from .errors import DimensionMismatch, ImageTooSmall
from .image import LuminancePlane

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# Central finite-difference step for gradients, in code values.
FD_STEP = 0.05


@dataclass(frozen=True)
class FidelityParams:
    """Knobs of the structural fidelity measure.

    window_size/window_std define the Gaussian window (normalized to sum 1);
    c1 and c2 keep the two ratio terms finite; sigma_map_tau is the local-std
    visibility threshold and sigma_map_theta its spread (tau/3 when None).
    """

    window_size: int = 11
    window_std: float = 1.5
    c1: float = 0.01
    c2: float = 10.0
    sigma_map_tau: float = 2.0
    sigma_map_theta: float = None

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError("window_size must be odd and >= 3")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.sigma_map_tau < 0:
            raise ValueError("sigma_map_tau must be nonnegative")
        if self.sigma_map_theta is None:
            object.__setattr__(self, "sigma_map_theta", self.sigma_map_tau / 3.0)
        if self.sigma_map_theta <= 0:
            raise ValueError("sigma_map_theta must be positive")


@dataclass(frozen=True)
class FidelityResult:
    s: float
    quality_map: np.ndarray


def gaussian_window(shape, std):
    """Gaussian weights over a window, normalized to sum exactly 1."""
    h, w = shape
    ys = np.arange(h, dtype=np.float64) - (h - 1) / 2.0
    xs = np.arange(w, dtype=np.float64) - (w - 1) / 2.0
    k = np.exp(-(ys[:, None] ** 2 + xs[None, :] ** 2) / (2.0 * std * std))
    return k / k.sum()


def mapped_local_std(sigma, params=FidelityParams()):
    """Visibility-mapped local std: Phi((sigma - tau) / theta), in (0, 1)."""
    return float(
        ndtr((sigma - params.sigma_map_tau) / params.sigma_map_theta)
    )


def _plane(a):
    data = a.data if isinstance(a, LuminancePlane) else np.asarray(a, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("expected a 2-d plane")
    return data


def s_local(patch_x, patch_y, params=FidelityParams(), weights=None):
    """Local fidelity of one window pair.

    Both factors reduce to exactly 1 for identical patches (including
    constants): the mapped stds coincide and the covariance equals the
    product of the stds.
    """
    px = np.asarray(patch_x, dtype=np.float64)
    py = np.asarray(patch_y, dtype=np.float64)
    if px.shape != py.shape:
        raise DimensionMismatch(f"patch shapes differ: {px.shape} vs {py.shape}")
    if weights is None:
        weights = gaussian_window(px.shape, params.window_std)
    w = np.asarray(weights, dtype=np.float64)
    mx = float((w * px).sum())
    my = float((w * py).sum())
    dx = px - mx
    dy = py - my
    vx = float((w * dx * dx).sum())
    vy = float((w * dy * dy).sum())
    cxy = float((w * dx * dy).sum())
    sx_hat = ndtr((np.sqrt(vx) - params.sigma_map_tau) / params.sigma_map_theta)
    sy_hat = ndtr((np.sqrt(vy) - params.sigma_map_tau) / params.sigma_map_theta)
    a = (2.0 * (sx_hat * sy_hat) + params.c1) / (
        sx_hat * sx_hat + sy_hat * sy_hat + params.c1
    )
    b = (cxy + params.c2) / (np.sqrt(vx * vy) + params.c2)
    return float(np.clip(a * b, -1.0, 1.0))


def _local_stats(x, y, kernel):
    """Sliding weighted means, variances, and covariance (valid region)."""
    mx = convolve(x, kernel, mode="valid")
    my = convolve(y, kernel, mode="valid")
    ex2 = convolve(x * x, kernel, mode="valid")
    ey2 = convolve(y * y, kernel, mode="valid")
    exy = convolve(x * y, kernel, mode="valid")
    vx = np.maximum(ex2 - mx * mx, 0.0)
    vy = np.maximum(ey2 - my * my, 0.0)
    cxy = exy - mx * my
    return mx, my, vx, vy, cxy


def _score_map(vx, vy, cxy, params):
    tau, theta = params.sigma_map_tau, params.sigma_map_theta
    sx_hat = ndtr((np.sqrt(vx) - tau) / theta)
    sy_hat = ndtr((np.sqrt(vy) - tau) / theta)
    a = (2.0 * (sx_hat * sy_hat) + params.c1) / (
        sx_hat * sx_hat + sy_hat * sy_hat + params.c1
    )
    b = (cxy + params.c2) / (np.sqrt(vx * vy) + params.c2)
    return np.clip(a * b, -1.0, 1.0)


def _check_pair(x, y, params):
    if x.shape != y.shape:
        raise DimensionMismatch(f"plane shapes differ: {x.shape} vs {y.shape}")
    k = params.window_size
    if x.shape[0] < k or x.shape[1] < k:
        raise ImageTooSmall(
            f"plane {x.shape} smaller than the {k}x{k} window"
        )


def structural_fidelity(x, y, params=FidelityParams()):
    """Dense sliding-window fidelity; S is the mean of the quality map.

    Parameters
    ----------
    x : LuminancePlane or (h, w) array
      Reference (HDR luminance normalized to [0, 255]).
    y : LuminancePlane or (h, w) array
      Candidate (LDR luminance).
    """
    x = _plane(x)
    y = _plane(y)
    _check_pair(x, y, params)
    kernel = gaussian_window((params.window_size, params.window_size), params.window_std)
    _, _, vx, vy, cxy = _local_stats(x, y, kernel)
    smap = _score_map(vx, vy, cxy, params)
    return FidelityResult(s=float(smap.mean()), quality_map=smap)


def _fd_gradient(x, y, params, step):
    """Central-difference gradient of S w.r.t. every pixel of y.

    Perturbing one pixel only touches the windows that contain it, so the two
    S evaluations per pixel reduce to incremental updates of the window
    moments, vectorized over one kernel offset at a time.
    """
    kernel = gaussian_window((params.window_size, params.window_size), params.window_std)
    k = params.window_size
    mx = convolve(x, kernel, mode="valid")
    my = convolve(y, kernel, mode="valid")
    vx = np.maximum(convolve(x * x, kernel, mode="valid") - mx * mx, 0.0)
    ey2 = convolve(y * y, kernel, mode="valid")
    exy = convolve(x * y, kernel, mode="valid")
    tau, theta = params.sigma_map_tau, params.sigma_map_theta
    sx_hat = ndtr((np.sqrt(vx) - tau) / theta)
    hv, wv = mx.shape
    m_windows = hv * wv
    grad = np.zeros_like(y)
    for di in range(k):
        for dj in range(k):
            wgt = kernel[di, dj]
            xs = x[di : di + hv, dj : dj + wv]
            ys = y[di : di + hv, dj : dj + wv]
            sides = []
            for delta in (step, -step):
                my_p = my + wgt * delta
                ey2_p = ey2 + wgt * (2.0 * ys * delta + delta * delta)
                exy_p = exy + wgt * xs * delta
                vy_p = np.maximum(ey2_p - my_p * my_p, 0.0)
                cxy_p = exy_p - mx * my_p
                sy_hat = ndtr((np.sqrt(vy_p) - tau) / theta)
                a = (2.0 * (sx_hat * sy_hat) + params.c1) / (
                    sx_hat * sx_hat + sy_hat * sy_hat + params.c1
                )
                b = (cxy_p + params.c2) / (np.sqrt(vx * vy_p) + params.c2)
                sides.append(np.clip(a * b, -1.0, 1.0))
            grad[di : di + hv, dj : dj + wv] += sides[0] - sides[1]
    grad /= 2.0 * step * m_windows
    return grad


def _analytic_gradient(x, y, params):
    """Closed-form gradient of S w.r.t. y.

    Each window contributes w_j*(alpha*y_j + beta*x_j + gamma) to the pixels
    it covers; spreading the per-window coefficients back over the image is a
    full-mode convolution with the (symmetric) window kernel.
    """
    kernel = gaussian_window((params.window_size, params.window_size), params.window_std)
    mx, my, vx, vy, cxy = _local_stats(x, y, kernel)
    tau, theta = params.sigma_map_tau, params.sigma_map_theta
    c1, c2 = params.c1, params.c2
    sx = np.sqrt(vx)
    sy = np.sqrt(vy)
    sx_hat = ndtr((sx - tau) / theta)
    sy_hat = ndtr((sy - tau) / theta)
    den_a = sx_hat * sx_hat + sy_hat * sy_hat + c1
    a = (2.0 * (sx_hat * sy_hat) + c1) / den_a
    den_b = sx * sy + c2
    b = (cxy + c2) / den_b
    # dA/d(sy_hat), chain through the CDF mapping and d(sy)/dy.
    da_dsyhat = (2.0 * sx_hat * den_a - (2.0 * sx_hat * sy_hat + c1) * 2.0 * sy_hat) / (
        den_a * den_a
    )
    # d(sy_hat)/d(sy) = standard normal pdf at (sy - tau)/theta, over theta.
    dsyhat_dsy = np.exp(-0.5 * ((sy - tau) / theta) ** 2) / (_SQRT_2PI * theta)
    inv_sy = np.zeros_like(sy)
    np.divide(1.0, sy, out=inv_sy, where=sy > 0.0)
    g1 = da_dsyhat * dsyhat_dsy * b * inv_sy
    g2 = a / den_b
    g3 = a * (-(cxy + c2) * sx / (den_b * den_b)) * inv_sy
    alpha = g1 + g3
    beta = g2
    gamma = -(alpha * my + beta * mx)
    m_windows = mx.size
    grad = (
        y * convolve2d(alpha, kernel, mode="full")
        + x * convolve2d(beta, kernel, mode="full")
        + convolve2d(gamma, kernel, mode="full")
    )
    return grad / m_windows


def fidelity_gradient(x, y, params=FidelityParams(), method="fd", step=FD_STEP):
    """Gradient of S(x, y) with respect to y.

    method "fd" uses central finite differences with the given step (code
    values); "analytic" uses the closed form (flat windows of y get a zero
    subgradient there).
    """
    x = _plane(x)
    y = _plane(y)
    _check_pair(x, y, params)
    if method == "fd":
        return _fd_gradient(x, y, params, step)
    if method == "analytic":
        return _analytic_gradient(x, y, params)
    raise ValueError(f"unknown gradient method {method!r}")


def fidelity_ascent_step(x, y_k, lam, params=FidelityParams(), method="fd"):
    """One gradient-ascent update of the candidate plane.

    Returns y_k + lam * grad S, clamped to the displayable range [0, 255].
    lam = 0 returns y_k unchanged.
    """
    if not np.isfinite(lam) or lam < 0:
        raise ValueError("lambda must be finite and nonnegative")
    xd = _plane(x)
    yd = _plane(y_k)
    _check_pair(xd, yd, params)
    if lam == 0.0:
        return LuminancePlane(yd.copy())
    g = fidelity_gradient(xd, yd, params, method=method)
    return LuminancePlane(np.clip(yd + lam * g, 0.0, 255.0))
