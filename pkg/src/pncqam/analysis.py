"""Closed-form SER/BER expressions for point-to-point, relay and overhearing links.

All SNR arguments are linear average symbol SNRs. Functions accept scalars or
numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

__all__ = [
    "SnrPair",
    "q_func",
    "ser_upper",
    "ser_square_exact",
    "ser_square_exact_distance",
    "ber_bounds",
    "ser_superposed",
    "ser_opp_upper_distance",
    "g_alpha",
    "ber_opp_approx",
    "solve_snr_for_ber_lower_bound",
    "ser_bpsk",
    "ser_pam",
    "ser_pam_superposed",
]

SQUARE_M = (4, 16, 64, 256)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def q_func(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return _out(0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)))


def _side(M):
    if M not in SQUARE_M:
        raise ValueError(f"square M-QAM needs M in {SQUARE_M}, got {M}")
    return math.isqrt(M)


def _nonneg(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError(f"{name} must be non-negative")
    return x


def ser_upper(d2_over_n0):
    """Union-style bound ``4 Q(sqrt(2 d^2 / N0))``, clamped to 1."""
    x = _nonneg("d2_over_n0", d2_over_n0)
    return _out(np.minimum(4.0 * np.asarray(q_func(np.sqrt(2.0 * x))), 1.0))


def _square_form(L, q):
    # 1 - (1 - x)^2 written as x (2 - x) to keep precision when x is tiny
    x = 2.0 * (L - 1) / L * q
    return x * (2.0 - x)


def ser_square_exact(M, gamma):
    """Exact square M-QAM SER at average SNR ``gamma``.

    >>> round(ser_square_exact(4, 9.0), 9)
    0.002697974
    """
    L = _side(M)
    g = _nonneg("gamma", gamma)
    return _out(_square_form(L, np.asarray(q_func(np.sqrt(3.0 * g / (M - 1))))))


def ser_square_exact_distance(M, d2_over_n0):
    """Same expression written in terms of ``d^2 / N0``."""
    L = _side(M)
    x = _nonneg("d2_over_n0", d2_over_n0)
    return _out(_square_form(L, np.asarray(q_func(np.sqrt(2.0 * x)))))


def ber_bounds(ps, M):
    """``(ps / log2 M, ps)``: one wrong bit at best, all of them at worst."""
    ps = np.asarray(ps, dtype=float)
    if np.any((ps < 0) | (ps > 1)):
        raise ValueError("ps must be a probability")
    return _out(ps / math.log2(M)), _out(ps)


def ser_superposed(M, gamma):
    """Approximate SER of the relay's decision on the ``(2L-1)^2`` superposed grid."""
    L = _side(M)
    g = _nonneg("gamma", gamma)
    q = np.asarray(q_func(np.sqrt(3.0 * g / (M - 1))))
    x = 4.0 * (L - 1) / (2 * L - 1) * q
    return _out(x * (2.0 - x))


def ser_opp_upper_distance(d_over, dprime_over, L):
    """SER bound under worst-case same-modulation interference.

    ``d_over`` and ``dprime_over`` are ``sqrt(2 d^2/N0)`` and
    ``sqrt(2 d'^2/N0)``; the interference can pull a point in by at most
    ``(L-1)`` interference half-spacings.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    a = _nonneg("d_over", d_over)
    b = _nonneg("dprime_over", dprime_over)
    arg = np.maximum(0.0, a - (L - 1) * b)
    return _out(np.minimum(4.0 * np.asarray(q_func(arg)), 1.0))


@dataclass(frozen=True)
class SnrPair:
    """Average SNRs of the wanted signal and of a same-modulation interferer."""

    gamma: float
    gamma_i: float
    M: int

    def __post_init__(self):
        if self.gamma < 0 or self.gamma_i < 0:
            raise ValueError("SNRs must be non-negative")
        _side(self.M)

    @classmethod
    def from_db(cls, gamma_db, gamma_i_db, M):
        return cls(10.0 ** (gamma_db / 10.0), 10.0 ** (gamma_i_db / 10.0), M)


def _f_alpha(M, gamma, gamma_i, alpha):
    L = _side(M)
    s = np.sqrt(3.0 * np.asarray(gamma, dtype=float) / (M - 1))
    si = np.sqrt(3.0 * np.asarray(gamma_i, dtype=float) / (M - 1))
    return np.maximum(0.0, s - alpha * (L - 1) * si), L


def g_alpha(snr: SnrPair, alpha):
    """Overhearing SER family: ``alpha=0`` lower bound, 1 upper bound, 1/2 estimate."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha < 0) | (alpha > 1)):
        raise ValueError("alpha must lie in [0, 1]")
    f, L = _f_alpha(snr.M, snr.gamma, snr.gamma_i, alpha)
    return _out(_square_form(L, np.asarray(q_func(f))))


def ber_opp_approx(snr: SnrPair):
    """Overhearing BER estimate ``g(1/2) / log2 M``."""
    return g_alpha(snr, 0.5) / math.log2(snr.M)


def solve_snr_for_ber_lower_bound(M, target_ber):
    """Linear SNR at which the interference-free BER lower bound equals ``target_ber``.

    Returns 0.0 when the target equals the zero-SNR plateau value.
    """
    L = _side(M)
    nbits = math.log2(M)
    plateau = _square_form(L, 0.5) / nbits
    if not 0 < target_ber <= plateau:
        raise ValueError(f"target BER must lie in (0, {plateau:.6g}] for M={M}")
    if math.isclose(target_ber, plateau, rel_tol=1e-12):
        return 0.0

    def h(log_g):
        return ser_square_exact(M, math.exp(log_g)) / nbits - target_ber

    lo, hi = math.log(1e-12), math.log(1e3)
    while h(hi) > 0:
        hi += math.log(10.0)
        if hi > math.log(1e30):
            raise ValueError("target BER too small to reach numerically")
    return math.exp(brentq(h, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500))


# modulations outside the square-QAM family, used by rate adaptation


def ser_pam(M, gamma):
    """Exact M-PAM SER at average SNR ``gamma``."""
    g = _nonneg("gamma", gamma)
    q = np.asarray(q_func(np.sqrt(6.0 * g / (M * M - 1))))
    return _out(2.0 * (M - 1) / M * q)


def ser_bpsk(gamma):
    """``Q(sqrt(2 gamma))``."""
    return ser_pam(2, gamma)


def ser_pam_superposed(M, gamma):
    """PAM analogue of :func:`ser_superposed` on the ``2M-1`` point superposed line."""
    g = _nonneg("gamma", gamma)
    q = np.asarray(q_func(np.sqrt(6.0 * g / (M * M - 1))))
    return _out(2.0 * (2 * M - 2) / (2 * M - 1) * q)
