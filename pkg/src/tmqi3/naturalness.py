"""Statistical naturalness of an LDR image from its global mean and std.

Brightness and contrast plausibility are each scored by a reflected Gaussian
CDF: the score rises toward the reference point (mu_r for brightness,
sigma_r for contrast) and falls symmetrically beyond it, saturating in both
tails. The product, normalized so its attainable maximum is 1, is N.
"""

from dataclasses import dataclass

from scipy.special import ndtr

import numpy as np

from .image import LuminancePlane


@dataclass(frozen=True)
class NaturalnessParams:
    """Reference statistics and spreads for the brightness/contrast CDFs.

    None-valued thresholds default to the reference points (t1 = t2 = mu_r,
    t3 = t4 = sigma_r, mu_e = mu_r, sigma_e = sigma_r), which makes each
    branch pair continuous at its switch. k defaults to pm(mu_r) * pd(sigma_r)
    so the best attainable N is exactly 1.
    """

    mu_r: float = 116.0
    sigma_r: float = 64.0
    theta1: float = 28.0
    theta2: float = 28.0
    theta3: float = 13.0
    theta4: float = 13.0
    t1: float = None
    t2: float = None
    t3: float = None
    t4: float = None
    mu_e: float = None
    sigma_e: float = None
    k: float = None

    def __post_init__(self):
        for th in (self.theta1, self.theta2, self.theta3, self.theta4):
            if th <= 0:
                raise ValueError("all theta spreads must be positive")
        defaults = {
            "t1": self.mu_r,
            "t2": self.mu_r,
            "t3": self.sigma_r,
            "t4": self.sigma_r,
            "mu_e": self.mu_r,
            "sigma_e": self.sigma_r,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if self.k is None:
            object.__setattr__(
                self, "k", pm(self.mu_r, self) * pd(self.sigma_r, self)
            )
        if self.k <= 0:
            raise ValueError("normalizer k must be positive")


@dataclass(frozen=True)
class NaturalnessResult:
    n: float
    pm: float
    pd: float
    mu: float
    sigma: float


def pm(mu, params=None):
    """Brightness plausibility: Gaussian CDF, reflected about mu_r past mu_e."""
    if params is None:
        params = NaturalnessParams()
    if mu <= params.mu_e:
        return float(ndtr((mu - params.t1) / params.theta1))
    return float(ndtr((2.0 * params.mu_r - mu - params.t2) / params.theta2))


def pd(sigma, params=None):
    """Contrast plausibility: Gaussian CDF, reflected about sigma_r past sigma_e."""
    if params is None:
        params = NaturalnessParams()
    if sigma <= params.sigma_e:
        return float(ndtr((sigma - params.t3) / params.theta3))
    return float(ndtr((2.0 * params.sigma_r - sigma - params.t4) / params.theta4))


def statistical_naturalness(y, params=NaturalnessParams()):
    """Score one LDR luminance plane.

    mu and sigma are the global population statistics of the plane; the
    result depends on nothing else, so any spatial shuffle of the pixels
    scores identically.
    """
    data = y.data if isinstance(y, LuminancePlane) else np.asarray(y, dtype=np.float64)
    mu = float(data.mean())
    sigma = float(data.std())
    p_m = pm(mu, params)
    p_d = pd(sigma, params)
    n = min(max(p_m * p_d / params.k, 0.0), 1.0)
    return NaturalnessResult(n=n, pm=p_m, pd=p_d, mu=mu, sigma=sigma)
