"""Forward performance criterion u(x, t) and its risk measures.

With ``z = h^{-1}(x, t)`` the marginal utility is ``u_x = exp(-z + t/2)``
and the local risk tolerance is ``r = h_z(z, t)``. All quantities below are
evaluated from moments of the measure at the inverted point, so ratios such
as ``r/x`` and ``r_x`` are exact tilted means and never suffer from
subtracting nearly equal numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import quad

from .errors import ValidationError
from .harmonic import _check_t, inverse_z
from .measure import Measure

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class CriterionPoint:
    """Risk profile of the criterion at one ``(x, t)``.

    Attributes
    ----------
    x, t, z : float
        Wealth, time, and ``h^{-1}(x, t)``.
    u_x : float
        Marginal utility.
    r, r_x, r_xx : float
        Local risk tolerance and its first two wealth derivatives.
    prudence : float
        ``x (1 + r_x) / r``.
    """

    x: float
    t: float
    z: float
    u_x: float
    r: float
    r_x: float
    r_xx: float
    prudence: float


def _moments_at(m: Measure, x, t: float):
    """Return ``z`` and the log moments of order 0..3 at ``h^{-1}(x, t)``."""
    z = np.asarray(inverse_z(m, x, t), dtype=float)
    logs = [m.log_moment(z, t, k) for k in range(4)]
    return z, logs


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def log_marginal_utility(m: Measure, x: ArrayLike, t: float):
    """log u_x(x, t) = -h^{-1}(x, t) + t/2."""
    t = _check_t(t)
    return _out(-np.asarray(inverse_z(m, x, t)) + 0.5 * t)


def marginal_utility(m: Measure, x: ArrayLike, t: float):
    """u_x(x, t) = exp(-h^{-1}(x, t) + t/2)."""
    return _out(np.exp(log_marginal_utility(m, x, t)))


def risk_tolerance(m: Measure, x: ArrayLike, t: float):
    """Local risk tolerance ``r(x, t) = -u_x/u_xx = h_z(h^{-1}(x, t), t)``.

    Computed as ``x * m_1/m_0`` so that ``r/x`` is the exact tilted mean.
    """
    t = _check_t(t)
    xa = np.asarray(x, dtype=float)
    z = np.asarray(inverse_z(m, xa, t))
    return _out(xa * np.exp(m.log_moment(z, t, 1) - m.log_moment(z, t, 0)))


def risk_tolerance_x(m: Measure, x: ArrayLike, t: float):
    """``r_x = h_zz / h_z`` at the inverted point."""
    t = _check_t(t)
    z = np.asarray(inverse_z(m, x, t))
    return _out(np.exp(m.log_moment(z, t, 2) - m.log_moment(z, t, 1)))


def risk_tolerance_xx(m: Measure, x: float, t: float, analytic: bool = False,
                      dx: float | None = None) -> float:
    """Second wealth derivative of the risk tolerance.

    By default a central difference of `risk_tolerance` with step
    ``1e-3 * x``; ``analytic=True`` uses ``(h_zzz h_z - h_zz^2) / h_z^3``.
    """
    t = _check_t(t)
    x = float(x)
    if analytic:
        z, lg = _moments_at(m, x, t)
        r1 = np.exp(lg[2] - lg[1])
        r2 = np.exp(lg[3] - lg[1])
        return float((r2 - r1**2) / np.exp(lg[1]))
    dx = 1e-3 * x if dx is None else float(dx)
    if dx >= x:
        raise ValidationError("step must be smaller than x", "dx")
    r = risk_tolerance(m, np.array([x - dx, x, x + dx]), t)
    return float((r[2] - 2.0 * r[1] + r[0]) / dx**2)


def prudence(m: Measure, x: ArrayLike, t: float):
    """Relative prudence ``p = x (1 + r_x) / r``."""
    t = _check_t(t)
    z = np.asarray(inverse_z(m, x, t))
    l0, l1, l2 = (m.log_moment(z, t, k) for k in range(3))
    return _out((1.0 + np.exp(l2 - l1)) / np.exp(l1 - l0))


def criterion_point(m: Measure, x: float, t: float, analytic_rxx: bool = False) -> CriterionPoint:
    """Evaluate every local quantity of the criterion at ``(x, t)``."""
    t = _check_t(t)
    x = float(x)
    z, lg = _moments_at(m, x, t)
    ratio = float(np.exp(lg[1] - lg[0]))
    r = x * ratio
    r_x = float(np.exp(lg[2] - lg[1]))
    r_xx = risk_tolerance_xx(m, x, t, analytic=analytic_rxx)
    return CriterionPoint(x, t, float(z), float(np.exp(-z + 0.5 * t)), r, r_x, r_xx,
                          (1.0 + r_x) / ratio)


def r_pde_residual(m: Measure, x: float, t: float, dx: float | None = None,
                   dt: float | None = None) -> float:
    """Finite-difference residual ``r_t + r^2 r_xx / 2`` built from r alone.

    Default steps are ``dx = 1e-3 x`` and ``dt = 1e-3 max(1, t)``; a
    second-order forward difference in ``t`` is used when ``t < dt``.
    """
    t = _check_t(t)
    x = float(x)
    dx = 1e-3 * x if dx is None else float(dx)
    dt = 1e-3 * max(1.0, t) if dt is None else float(dt)
    rx = risk_tolerance(m, np.array([x - dx, x, x + dx]), t)
    r0 = rx[1]
    r_xx = (rx[2] - 2.0 * r0 + rx[0]) / dx**2
    if t >= dt:
        r_t = (risk_tolerance(m, x, t + dt) - risk_tolerance(m, x, t - dt)) / (2.0 * dt)
    else:
        r_t = (-3.0 * r0 + 4.0 * risk_tolerance(m, x, t + dt)
               - risk_tolerance(m, x, t + 2.0 * dt)) / (2.0 * dt)
    return float(r_t + 0.5 * r0**2 * r_xx)


def _panel_width(m: Measure) -> float:
    # The z-integrand is a mixture of exponentials exp((y - 1) z).
    s = m.support
    return 0.5 / max(1.0, abs(s.a - 1.0), abs(s.b - 1.0))


def _integrate_z(m: Measure, t: float, breaks: NDArray) -> NDArray:
    """Integrals of ``exp(-z + t/2) h_z(z, t)`` over consecutive `breaks`.

    Composite Gauss-Legendre with panels no wider than half an e-folding of
    the fastest exponential in the integrand; the rule is exact to rounding.
    """
    lengths = np.diff(breaks)
    n_pan = np.maximum(1, np.ceil(lengths / _panel_width(m)).astype(int))
    seg = np.repeat(np.arange(lengths.size), n_pan)
    first = np.repeat(np.cumsum(n_pan) - n_pan, n_pan)
    idx = np.arange(seg.size) - first
    width = lengths[seg] / n_pan[seg]
    left = breaks[seg] + idx * width
    nodes = left[:, None] + 0.5 * width[:, None] * (_GL_NODES[None, :] + 1.0)
    logf = -nodes + 0.5 * t + m.log_moment(nodes.ravel(), t, 1).reshape(nodes.shape)
    panel = np.sum(np.exp(logf) * _GL_WEIGHTS[None, :], axis=1) * 0.5 * width
    return np.bincount(seg, weights=panel, minlength=lengths.size)


def utility_from_z(m: Measure, z_ref: float, zs: ArrayLike, t: float) -> NDArray:
    """``u(h(zs, t), t) - u(h(z_ref, t), t)`` for spatial arguments `zs`.

    Uses ``du = u_x dx = exp(-z + t/2) h_z dz``.
    """
    zs = np.asarray(zs, dtype=float)
    flat = zs.ravel()
    order = np.argsort(flat)
    pts = np.concatenate(([z_ref], flat[order]))
    breaks, inv = np.unique(pts, return_inverse=True)
    if breaks.size == 1:
        return np.zeros(zs.shape)
    cum = np.concatenate(([0.0], np.cumsum(_integrate_z(m, t, breaks))))
    vals = cum[inv] - cum[inv[0]]
    out = np.empty(flat.size)
    out[order] = vals[1:]
    return out.reshape(zs.shape)


def utility_curve(m: Measure, x_ref: float, xs: ArrayLike, t: float):
    """``u(x, t) - u(x_ref, t)`` for each ``x`` in `xs`.

    The criterion is defined by its marginal utility only, so values are
    reported relative to the reference wealth at the same time.

    Examples
    --------
    >>> from fwdturnpike.measure import DiracMixture
    >>> m = DiracMixture([2.0], [1.0])
    >>> round(float(utility_curve(m, 1.0, [4.0], 0.0)[0]), 10)
    2.0
    """
    t = _check_t(t)
    xs = np.asarray(xs, dtype=float)
    if np.any(xs <= 0) or float(x_ref) <= 0:
        raise ValidationError("wealth levels must be positive", "xs")
    z_ref = float(inverse_z(m, float(x_ref), t))
    return utility_from_z(m, z_ref, inverse_z(m, xs, t), t)


def utility_drift(m: Measure, x_ref: float, t: float) -> float:
    """``u(x_ref, t) - u(x_ref, 0)``, from ``u_t = -u_x r / 2``.

    Combined with `utility_curve` this fixes one consistent additive
    constant across times, which is what martingale checks require.
    """
    t = _check_t(t)
    if t == 0.0:
        return 0.0

    def rate(s):
        z = float(inverse_z(m, float(x_ref), s))
        return -0.5 * float(np.exp(-z + 0.5 * s + m.log_moment(np.asarray(z), s, 1)))

    val, _ = quad(rate, 0.0, t, epsabs=0.0, epsrel=1e-12, limit=200)
    return float(val)
