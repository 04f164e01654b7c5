"""Polynomial moments of one-sided Gaussian and exponential weights.

The kernels here are the building blocks of the closed-form Lebesgue
moments. All of them integrate a non-negative integrand from an endpoint
outward, so no sign cancellation is introduced by the change of variables.

    P_i(w, W) = int_0^W  s^i exp(-w s - s^2 / 2) ds,   w >= 0
    Q_i(g, L) = int_0^L  v^i exp(-g v) dv,             g >= 0
"""

from __future__ import annotations

from math import comb

import numpy as np
from scipy.special import erfcx, gammainc, gammaln

_SQRT_HALF_PI = np.sqrt(np.pi / 2.0)
_SQRT2 = np.sqrt(2.0)

# Below this rate the upward recurrence loses at most a few ulps; above it
# the ratio continued fraction is used instead.
_FORWARD_MAX_RATE = 1.0
# When the exponent varies by less than this over [0, W] a single fixed
# Gauss-Legendre rule integrates to machine precision.
_DIRECT_MAX_SPREAD = 8.0
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def tail_moments_inf(w, kmax: int) -> np.ndarray:
    """P_i(w, inf) for i = 0..kmax.

    Parameters
    ----------
    w : array_like
        Non-negative linear rates.
    kmax : int
        Highest power.

    Returns
    -------
    numpy.ndarray
        Shape ``(kmax + 1,) + w.shape``.
    """
    w = np.asarray(w, dtype=float)
    out = np.empty((kmax + 1,) + w.shape)
    p0 = _SQRT_HALF_PI * erfcx(w / _SQRT2)
    out[0] = p0
    if kmax == 0:
        return out

    fwd = w < _FORWARD_MAX_RATE
    # Upward recurrence: P_{i+1} = i P_{i-1} - w P_i, with P_1 = 1 - w P_0.
    prev, cur = p0, 1.0 - w * p0
    out[1] = cur
    for i in range(1, kmax):
        prev, cur = cur, i * prev - w * cur
        out[i + 1] = cur

    if not np.all(fwd):
        # Backward ratio recurrence rho_i = i / (w + rho_{i+1}), rho_i = P_i/P_{i-1}.
        wc = np.where(fwd, _FORWARD_MAX_RATE, w)
        n_terms = int(np.ceil((24.0 / float(np.min(wc))) ** 2)) + kmax + 16
        rho = np.zeros_like(wc)
        ratios = [None] * (kmax + 1)
        for i in range(n_terms, 0, -1):
            rho = i / (wc + rho)
            if i <= kmax:
                ratios[i] = rho
        acc = p0
        for i in range(1, kmax + 1):
            acc = acc * ratios[i]
            out[i] = np.where(fwd, out[i], acc)
    return out


def tail_moments(w, width, kmax: int) -> np.ndarray:
    """P_i(w, W) for a finite or infinite upper limit W.

    Parameters
    ----------
    w : array_like
        Non-negative linear rates.
    width : array_like
        Upper integration limits (may be ``inf``), broadcast against `w`.
    kmax : int
        Highest power.

    Returns
    -------
    numpy.ndarray
        Shape ``(kmax + 1,) + broadcast shape``.
    """
    w, width = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(width, dtype=float))
    fin = np.where(np.isfinite(width), width, 0.0)
    spread = np.where(np.isfinite(width), w * fin + 0.5 * fin**2, np.inf)
    direct = spread < _DIRECT_MAX_SPREAD
    out = np.empty((kmax + 1,) + w.shape)

    # Long intervals: full tail minus the tail beyond W.
    full = tail_moments_inf(w, kmax)
    out[...] = full
    finite = np.isfinite(width) & ~direct
    if np.any(finite):
        wf, Wf = w[finite], width[finite]
        beyond = tail_moments_inf(wf + Wf, kmax)
        scale = np.exp(-spread[finite])
        for i in range(kmax + 1):
            acc = np.zeros_like(wf)
            for j in range(i + 1):
                acc = acc + comb(i, j) * Wf ** (i - j) * beyond[j]
            out[i][finite] = full[i][finite] - scale * acc

    # Short intervals: fixed Gauss-Legendre on [0, W].
    if np.any(direct):
        wd, Wd = w[direct], width[direct]
        s = 0.5 * Wd[:, None] * (_GL_NODES[None, :] + 1.0)
        f = np.exp(-wd[:, None] * s - 0.5 * s**2) * (0.5 * Wd[:, None] * _GL_WEIGHTS[None, :])
        for i in range(kmax + 1):
            out[i][direct] = np.sum(f * s**i, axis=1)
    return out


def exp_moments(g, length, kmax: int) -> np.ndarray:
    """Q_i(g, L) = int_0^L v^i exp(-g v) dv for i = 0..kmax.

    Parameters
    ----------
    g : array_like
        Non-negative decay rates.
    length : float
        Interval length ``L > 0``.
    kmax : int
        Highest power.
    """
    g = np.asarray(g, dtype=float)
    lam = g * length
    out = np.empty((kmax + 1,) + g.shape)
    small = lam < 1e-3
    for i in range(kmax + 1):
        # L^{i+1} int_0^1 s^i e^{-lam s} ds, via the regularized gamma or a series.
        lam_safe = np.where(small, 1.0, lam)
        big = np.exp(gammaln(i + 1) - (i + 1) * np.log(lam_safe)) * gammainc(i + 1, lam_safe)
        ser = np.zeros_like(lam)
        term = np.ones_like(lam)
        for m in range(8):
            ser = ser + term / (i + 1 + m)
            term = term * (-lam) / (m + 1)
        out[i] = length ** (i + 1) * np.where(small, ser, big)
    return out
