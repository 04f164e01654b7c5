"""Closed-form large-time and large-wealth expansions.

Each function returns the leading-order predictions for one measure family
at a single ``(x, t)``. Entries that do not apply (for instance the
positive-``a`` temporal expansion when the support starts at zero) are
``nan``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .measure import DiracMixture, LebesgueSegment, Measure
from .performance import log_marginal_utility
from .special import lambert_w_exp


def dirac_expansion(m: DiracMixture, x: float, t: float) -> dict[str, float]:
    """Expansions of ``h^{-1}`` and ``r`` for a Dirac mixture.

    With atoms ``y_1 < ... < y_N``, weights ``w_n`` and ``1 - gamma = 1/y_N``:

    - ``h_inv_temporal``: ``y_1 t/2 + log(x/w_1)/y_1`` as ``t -> inf``
    - ``h_inv_spatial``: ``(1-gamma) log(x/w_N) + t/(2(1-gamma))`` as ``x -> inf``
    - ``r_temporal``: ``y_1 x`` with ``r_temporal_rate = exp(y_2 (y_1 - y_2) t/2)``
    - ``r_spatial``: ``sum_n w_n y_n exp(y_n t (y_N - y_n)/2) (x/w_N)^{y_n/y_N}``

    The weighted forms reduce to the unit-weight expressions when all
    ``w_n = 1``.
    """
    if not isinstance(m, DiracMixture):
        raise ValidationError("requires a Dirac mixture", "measure")
    x, t = float(x), float(t)
    y, w = m.points, m.weights
    b = y[-1]
    out = {
        "h_inv_temporal": 0.5 * y[0] * t + np.log(x / w[0]) / y[0] if y[0] > 0 else np.nan,
        "h_inv_spatial": np.log(x / w[-1]) / b + 0.5 * b * t,
        "r_temporal": y[0] * x,
        "r_temporal_rate": float(np.exp(0.5 * y[1] * (y[0] - y[1]) * t)) if y.size > 1 else 0.0,
    }
    logs = np.log(w * y) + 0.5 * y * t * (b - y) + (y / b) * np.log(x / w[-1])
    with np.errstate(over="ignore"):
        out["r_spatial"] = float(np.exp(np.logaddexp.reduce(logs)))
    return {k: float(v) for k, v in out.items()}


def lebesgue_expansion(m: LebesgueSegment, x: float, t: float) -> dict[str, float]:
    """Expansions of ``h^{-1}`` and ``r`` for Lebesgue measure on ``[a, b]``.

    - ``h_inv_temporal``: ``a t/2 + (log t + log x + log(a/2))/a`` (``a > 0``)
    - ``h_inv_temporal_lambert``: ``a t - W((a/x) exp(a^2 t/2))/a`` (``a > 0``),
      the Lambert-W form the previous line is the logarithmic expansion of
    - ``h_inv_spatial``: ``t/(2(1-gamma)) + (1-gamma)(log x + log log x + log(1-gamma))``
    - ``r_spatial``: growth law of ``r(x, t)`` as ``x -> inf``; for ``t = 0`` it is
      ``x (1 - 1/log x)/(1-gamma)``
    - ``h_inv_temporal_zero_a``: ``sqrt((log t + 2 log x - log 2 pi)/t)``, the
      prediction of ``h^{-1}/t`` when ``a = 0``
    """
    if not isinstance(m, LebesgueSegment):
        raise ValidationError("requires a Lebesgue segment", "measure")
    x, t = float(x), float(t)
    a, b = m.a, m.b
    g1 = 1.0 / b
    nan = float("nan")
    lx = np.log(x)
    llx = np.log(lx) if lx > 0 else nan
    out = {}
    if a > 0 and t > 0:
        out["h_inv_temporal"] = 0.5 * a * t + (np.log(t) + lx + np.log(0.5 * a)) / a
        out["h_inv_temporal_lambert"] = a * t - lambert_w_exp(np.log(a / x) + 0.5 * a * a * t) / a
    else:
        out["h_inv_temporal"] = nan
        out["h_inv_temporal_lambert"] = nan
    out["h_inv_spatial"] = 0.5 * t * b + g1 * (lx + llx + np.log(g1))
    if t > 0:
        second = np.exp(a * g1 * (np.log(g1 * x) + llx) + 0.5 * a * (b - a) * t) / t
        out["r_spatial"] = (g1 / t) * x * llx + second + 0.5 * b * x - (g1 / t) * x * np.log(b)
    else:
        out["r_spatial"] = b * x * (1.0 - 1.0 / lx) if lx != 0 else nan
    arg = np.log(t) + 2.0 * lx - np.log(2.0 * np.pi) if t > 0 else -1.0
    out["h_inv_temporal_zero_a"] = float(np.sqrt(arg / t)) if arg >= 0 else nan
    return {k: float(v) for k, v in out.items()}


@dataclass(frozen=True)
class RegularVariationRow:
    """One entry of a regular-variation table.

    Attributes
    ----------
    k, x : float
        Scale factor and base wealth.
    ratio : float
        ``u_x(k x, 0) / u_x(x, 0)``.
    target : float
        ``k^(gamma - 1)``.
    rel_error : float
        ``|ratio / target - 1|``.
    """

    k: float
    x: float
    ratio: float
    target: float
    rel_error: float


def regular_variation_check(m: Measure, ks, xs) -> list[RegularVariationRow]:
    """Tabulate ``u_x(kx, 0)/u_x(x, 0)`` against ``k^(gamma - 1)``."""
    gamma = m.support.gamma
    rows = []
    for k in np.atleast_1d(np.asarray(ks, dtype=float)):
        for x in np.atleast_1d(np.asarray(xs, dtype=float)):
            ratio = float(np.exp(log_marginal_utility(m, k * x, 0.0) - log_marginal_utility(m, x, 0.0)))
            target = float(k ** (gamma - 1.0))
            rows.append(RegularVariationRow(float(k), float(x), ratio, target, abs(ratio / target - 1.0)))
    return rows
