"""Classical (backward) Merton problem with a two-term terminal utility.

The terminal marginal utility has inverse ``I(x) = x^{-p} + x^{-q}`` with
``p = 1/(1-theta)`` and ``q = 1/(1-gamma) = 2/(1-theta)``, the same datum
as the forward criterion built on the two-Dirac measure ``{p, q}``. With
time-to-horizon ``tau`` and constant market price of risk ``lambda``, the
inverse marginal value function is

    v(x, tau) = exp(alpha tau) x^{-p} + exp(beta tau) x^{-q}.

Writing ``eps = exp((2 alpha - beta) tau) <= 1`` and ``s = sqrt(eps)``, its
risk tolerance is

    r(x, tau) = p (2 x s / (s + sqrt(eps + 4x)) + 8 x^2 / (s + sqrt(eps + 4x))^2),

which stays finite as ``tau -> inf`` because ``eps`` only underflows to 0.
Both ``r/x`` limits (``x -> inf`` at fixed ``tau`` and ``tau -> inf`` at
fixed ``x``) equal ``2p = q``, so they coincide, unlike the forward pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .asymptotics import TurnpikeSeries, geometric_grid
from .errors import ValidationError
from .measure import DiracMixture


@dataclass(frozen=True)
class ClassicalSpec:
    """Parameters of the classical comparison.

    Attributes
    ----------
    theta : float
        In ``(0, 1)``.
    lam : float
        Constant market price of risk.
    """

    theta: float = 0.5
    lam: float = 1.0

    def __post_init__(self):
        if not (0.0 < float(self.theta) < 1.0):
            raise ValidationError("must lie in (0, 1)", "theta")
        if not np.isfinite(self.lam):
            raise ValidationError("must be finite", "lambda")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def gamma(self) -> float:
        return 0.5 * (1.0 + self.theta)

    @property
    def p(self) -> float:
        """Exponent ``1/(1-theta)`` of the first term of ``I``."""
        return 1.0 / (1.0 - self.theta)

    @property
    def q(self) -> float:
        """Exponent ``1/(1-gamma)`` of the second term of ``I``."""
        return 1.0 / (1.0 - self.gamma)

    @property
    def alpha(self) -> float:
        return 0.5 * self.lam**2 * self.theta / (1.0 - self.theta) ** 2

    @property
    def beta(self) -> float:
        return self.lam**2 * (1.0 + self.theta) / (1.0 - self.theta) ** 2

    def forward_measure(self) -> DiracMixture:
        """Two-Dirac measure ``{p, q}`` with the same initial datum."""
        return DiracMixture([self.p, self.q], [1.0, 1.0])


def _check(x, tau):
    x = np.asarray(x, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise ValidationError("must be positive and finite", "x")
    if np.any(~(tau >= 0)) or np.any(~np.isfinite(tau)):
        raise ValidationError("must be finite and non-negative", "tau")
    return x, tau


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def classical_inverse_marginal(spec: ClassicalSpec, x: ArrayLike, tau: ArrayLike):
    """``v(x, tau) = exp(alpha tau) x^{-p} + exp(beta tau) x^{-q}``.

    Evaluated in logs and combined with ``logaddexp``.
    """
    x, tau = _check(x, tau)
    lx = np.log(x)
    with np.errstate(over="ignore"):
        return _out(np.exp(np.logaddexp(spec.alpha * tau - spec.p * lx, spec.beta * tau - spec.q * lx)))


def classical_risk_tolerance(spec: ClassicalSpec, x: ArrayLike, tau: ArrayLike):
    """Risk tolerance of the classical value function at time-to-horizon `tau`.

    Examples
    --------
    >>> classical_risk_tolerance(ClassicalSpec(0.5, 1.0), 2.0, 0.0)
    6.0
    """
    x, tau = _check(x, tau)
    log_eps = (2.0 * spec.alpha - spec.beta) * tau
    eps = np.exp(log_eps)
    s = np.exp(0.5 * log_eps)
    den = s + np.sqrt(eps + 4.0 * x)
    return _out(spec.p * (2.0 * x * s / den + 8.0 * x**2 / den**2))


@dataclass(frozen=True)
class ClassicalLimits:
    """Spatial and temporal ratio series of the classical risk tolerance.

    Attributes
    ----------
    spatial, temporal : TurnpikeSeries
        ``r/x`` along ``x`` at fixed ``tau0`` and along ``tau`` at fixed
        ``x0``. `prediction` holds the common closed-form limit.
    limit : float
        Common limit ``1/(1-gamma)`` of both series.
    forward_pair : tuple of float
        ``(b, a)``, the spatial and temporal limits of the forward criterion
        with the same initial datum.
    """

    spatial: TurnpikeSeries
    temporal: TurnpikeSeries
    limit: float
    forward_pair: tuple[float, float]

    @property
    def coincidence_gap(self) -> float:
        """``|spatial - temporal|`` at the grid ends."""
        return abs(float(self.spatial.ratio[-1]) - float(self.temporal.ratio[-1]))

    @property
    def forward_gap(self) -> float:
        return self.forward_pair[0] - self.forward_pair[1]


def _series(axis, fixed, grid, ratio, limit, label) -> TurnpikeSeries:
    nan = np.full(grid.shape, np.nan)
    return TurnpikeSeries(axis, float(fixed), grid, ratio, nan, nan, nan.copy(), nan.copy(),
                          np.full(grid.shape, limit), np.abs(ratio - limit), "r/x", limit, label=label)


def classical_limits(spec: ClassicalSpec, x_grid=None, tau_grid=None, x0: float = 1.0,
                     tau0: float = 1.0) -> ClassicalLimits:
    """Tabulate ``r/x`` along both axes.

    Defaults are ``x`` in geometric ``[1, 1e8]`` and ``tau`` in geometric
    ``[1, 1e4]``.
    """
    xs = geometric_grid(1.0, 1e8) if x_grid is None else np.asarray(x_grid, dtype=float)
    taus = geometric_grid(1.0, 1e4) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    _check(xs, tau0)
    _check(x0, taus)
    limit = spec.q
    spatial = _series("spatial", tau0, xs, classical_risk_tolerance(spec, xs, tau0) / xs, limit,
                      "classical")
    temporal = _series("temporal", x0, taus, classical_risk_tolerance(spec, x0, taus) / x0, limit,
                       "classical")
    return ClassicalLimits(spatial, temporal, limit, (spec.q, spec.p))
