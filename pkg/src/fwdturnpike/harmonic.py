"""The space-time harmonic function h(z, t) and its spatial inverse.

``h(z, t) = int exp(y z - y^2 t / 2) mu(dy)`` solves the backward heat
equation ``h_t + h_zz / 2 = 0``. For fixed ``t`` it is strictly increasing
and log-convex in ``z``, which makes Newton's method on ``log h`` globally
convergent from any starting point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NoConvergenceError, ValidationError
from .measure import Measure, exp_moment, log_exp_moment

Z_LIMIT = 1e6
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class HarmonicEval:
    """Value and spatial derivatives of h at one point.

    Attributes
    ----------
    z, t : float
        Evaluation point.
    h, h_z, h_zz, h_zzz : float
        Moments of order 0 to 3.
    """

    z: float
    t: float
    h: float
    h_z: float
    h_zz: float
    h_zzz: float

    @property
    def h_t(self) -> float:
        """Time derivative, ``-h_zz / 2`` by the heat equation."""
        return -0.5 * self.h_zz


@dataclass(frozen=True)
class InverseEval:
    """Solution of ``h(z, t) = x``.

    Attributes
    ----------
    x, t : float
        Wealth level and time.
    z : float
        ``h^{-1}(x, t)``.
    z_t : float
        Time derivative of the inverse, ``h_zz / (2 h_z)``.
    iterations : int
        Newton iterations used.
    """

    x: float
    t: float
    z: float
    z_t: float
    iterations: int


def _check_t(t) -> float:
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValidationError("must be finite and non-negative", "t")
    return t


def h_eval(m: Measure, z: float, t: float) -> HarmonicEval:
    """Evaluate h and its first three z-derivatives.

    Raises
    ------
    RangeError
        If any moment leaves double-precision range.
    """
    t = _check_t(t)
    z = float(z)
    h, hz, hzz, hzzz = (exp_moment(m, z, t, k) for k in range(4))
    return HarmonicEval(z, t, h, hz, hzz, hzzz)


def log_h(m: Measure, z: ArrayLike, t: float):
    """log h(z, t), vectorised over `z`."""
    return log_exp_moment(m, z, _check_t(t), 0)


def _initial_guess(m: Measure, log_x: NDArray, t: float) -> NDArray:
    s = m.support
    return (1.0 - s.gamma) * log_x + 0.5 * s.a * t


def inverse_z(m: Measure, x: ArrayLike, t: float, rtol: float = 1e-12,
              max_iter: int = 100, return_iterations: bool = False):
    """Vectorised ``h^{-1}(x, t)``.

    Newton's method on ``f(z) = log h(z, t) - log x``. Because ``f`` is
    convex and increasing, every Newton iterate after the first lies at or
    to the right of the root and the sequence decreases monotonically. A
    bisection step is taken whenever a step would leave the bracket
    established so far.

    Parameters
    ----------
    m : Measure
    x : array_like
        Positive wealth levels.
    t : float
        Time.
    rtol : float
        Required relative accuracy of ``h(z, t)`` against `x`. The check
        is relaxed to the floating-point noise floor of ``log h`` when
        that is larger (very large ``|z|`` or ``t``).
    max_iter : int
        Iteration cap.

    Raises
    ------
    NoConvergenceError
        If the iterates leave ``|z| <= 1e6`` or do not converge.
    """
    t = _check_t(t)
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa <= 0):
        raise ValidationError("must be positive and finite", "x")
    log_x = np.log(xa).ravel()
    s = m.support
    z = _initial_guess(m, log_x, t)
    lo = np.full_like(z, -np.inf)
    hi = np.full_like(z, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    iters = np.zeros(z.shape, dtype=int)

    for _ in range(max_iter):
        act = ~done
        if not np.any(act):
            break
        za = z[act]
        if np.any(np.abs(za) > Z_LIMIT):
            bad = za[np.abs(za) > Z_LIMIT][0]
            raise NoConvergenceError(f"h_inverse failed to bracket a root (z={bad:.6g}) at t={t!r}")
        l0 = m.log_moment(za, t, 0)
        l1 = m.log_moment(za, t, 1)
        f = l0 - log_x[act]
        slope = np.exp(l1 - l0)
        lo[act] = np.where(f < 0, np.maximum(lo[act], za), lo[act])
        hi[act] = np.where(f > 0, np.minimum(hi[act], za), hi[act])
        step = f / slope
        new = za - step
        bracketed = np.isfinite(lo[act]) & np.isfinite(hi[act])
        outside = bracketed & ~((new > lo[act]) & (new < hi[act]))
        mid = 0.5 * (np.where(bracketed, lo[act], 0.0) + np.where(bracketed, hi[act], 0.0))
        new = np.where(outside, mid, new)
        # stop on a negligible step, or when f is at the rounding level of
        # log h (a small slope can otherwise amplify that noise into steps)
        conv = ((np.abs(step) <= 4 * _EPS * np.maximum(1.0, np.abs(za)))
                | (np.abs(f) <= 4 * _EPS * np.maximum(1.0, np.abs(log_x[act]))))
        z[act] = np.where(conv, za, new)
        iters[act] += ~conv
        idx = np.flatnonzero(act)
        done[idx[conv]] = True
    if not np.all(done):
        raise NoConvergenceError(f"h_inverse did not converge in {max_iter} iterations at t={t!r}")

    # Final accuracy check against the noise floor of log h.
    f = m.log_moment(z, t, 0) - log_x
    noise = 16 * _EPS * (np.abs(z) * s.b + 0.5 * t * s.b**2 + np.abs(log_x) + 1.0)
    if np.any(np.abs(f) > np.maximum(rtol, noise)):
        i = int(np.argmax(np.abs(f) - np.maximum(rtol, noise)))
        raise NoConvergenceError(
            f"h_inverse residual {abs(f[i]):.3g} exceeds tolerance at x={np.exp(log_x[i])!r}, t={t!r}")
    z = z.reshape(xa.shape)
    if return_iterations:
        return (float(z) if z.ndim == 0 else z), int(iters.max(initial=0))
    return float(z) if z.ndim == 0 else z


def h_inverse(m: Measure, x: float, t: float, rtol: float = 1e-12) -> InverseEval:
    """Solve ``h(z, t) = x`` for ``z`` and report ``z_t``.

    Examples
    --------
    >>> from fwdturnpike.measure import DiracMixture
    >>> round(h_inverse(DiracMixture([2.0], [1.0]), 1.0, 1.0).z, 12)
    1.0
    """
    t = _check_t(t)
    z, n = inverse_z(m, float(x), t, rtol=rtol, return_iterations=True)
    z_t = 0.5 * float(np.exp(m.log_moment(np.asarray(z), t, 2) - m.log_moment(np.asarray(z), t, 1)))
    return InverseEval(float(x), t, z, z_t, n)


def heat_residual(m: Measure, z: float, t: float, dz: float | None = None,
                  dt: float | None = None) -> float:
    """Finite-difference residual ``h_t + h_zz / 2`` built from h alone.

    Central differences in both variables; a second-order forward
    difference in ``t`` is used when ``t < dt``.
    """
    t = _check_t(t)
    z = float(z)
    scale = max(1.0, abs(z), t)
    dz = 1e-4 * scale if dz is None else float(dz)
    dt = 1e-4 * scale if dt is None else float(dt)

    def h(zz, tt):
        return exp_moment(m, zz, tt, 0)

    h0 = h(z, t)
    h_zz = (h(z + dz, t) - 2.0 * h0 + h(z - dz, t)) / dz**2
    if t >= dt:
        h_t = (h(z, t + dt) - h(z, t - dt)) / (2.0 * dt)
    else:
        h_t = (-3.0 * h0 + 4.0 * h(z, t + dt) - h(z, t + 2.0 * dt)) / (2.0 * dt)
    return h_t + 0.5 * h_zz
