"""Link budget, Rician flat fading and AWGN."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinkBudget",
    "noise_power",
    "path_gain",
    "rician_sample",
    "apply_awgn",
    "db_to_linear",
    "linear_to_db",
    "spawn_rngs",
]


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def noise_power(density_dbm_hz=-174.0, nf_db=6.0, bw_hz=1e6):
    """Receiver noise power in dBm."""
    if not bw_hz > 0:
        raise ValueError("bandwidth must be positive")
    return density_dbm_hz + nf_db + 10.0 * math.log10(bw_hz)


def path_gain(r):
    """Average power gain ``1 / r**4`` at distance ``r`` metres."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("distance must be positive")
    g = r**-4.0
    return float(g) if g.ndim == 0 else g


def rician_sample(K_db, rng, size=None):
    """Unit-mean-power Rician fading gain(s).

    ``h = sqrt(K/(K+1)) e^{j theta} + sqrt(1/(K+1)) w`` with ``theta`` uniform
    and ``w`` circular complex Gaussian of unit variance. ``K_db=-inf`` gives
    Rayleigh fading and ``K_db=inf`` a pure line-of-sight gain.
    """
    K = math.inf if K_db == math.inf else 10.0 ** (K_db / 10.0)
    theta = rng.uniform(0.0, 2.0 * math.pi, size)
    w = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)
    if math.isinf(K):
        h = np.exp(1j * theta)
    else:
        h = math.sqrt(K / (K + 1.0)) * np.exp(1j * theta) + math.sqrt(1.0 / (K + 1.0)) * w
    return complex(h) if size is None else h


def apply_awgn(points, sigma2, rng):
    """Add real and imaginary Gaussian noise, each of variance ``sigma2``."""
    if sigma2 < 0:
        raise ValueError("noise variance must be non-negative")
    x = np.asarray(points, dtype=complex)
    if sigma2 == 0:
        return x.copy()
    s = math.sqrt(sigma2)
    return x + s * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))


def spawn_rngs(seed, n):
    """``n`` independent generators derived deterministically from ``seed``."""
    ss = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(n)]


@dataclass(frozen=True)
class LinkBudget:
    """One directed link: powers in dBm, distance in metres, complex fading gain."""

    p_tx: float
    r: float
    p_noise: float
    h: complex = 1.0
    K: float = 5.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("distance must be positive")

    @property
    def snr_db(self) -> float:
        return self.p_tx + 10.0 * math.log10(abs(self.h) ** 2 * path_gain(self.r)) - self.p_noise

    @property
    def snr(self) -> float:
        """Linear received SNR, computed without going through dB."""
        p_tx_mw = 10.0 ** (self.p_tx / 10.0)
        n_mw = 10.0 ** (self.p_noise / 10.0)
        return p_tx_mw * abs(self.h) ** 2 * path_gain(self.r) / n_mw

    @property
    def rx_power_dbm(self) -> float:
        return self.p_tx + 10.0 * math.log10(abs(self.h) ** 2 * path_gain(self.r))
