"""Finite measures on a compact interval and their exponential moments.

Every quantity in the package is built from

    m_k(z, t) = int y^k exp(y z - y^2 t / 2) mu(dy),

which is evaluated in log space for three families of measures: finite
Dirac mixtures, Lebesgue measure on a segment, and tabulated densities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import PchipInterpolator
from scipy.special import logsumexp

from ._gaussian import exp_moments, tail_moments
from .errors import RangeError, ValidationError

LOG_MAX = float(np.log(np.finfo(float).max))
LOG_MIN = float(np.log(np.finfo(float).tiny))
MAX_ORDER = 4


@dataclass(frozen=True)
class SupportInfo:
    """Support endpoints and the mass sitting at the right endpoint.

    Attributes
    ----------
    a, b : float
        Smallest and largest points of the support.
    mass_at_b : float
        ``mu({b})``; zero for absolutely continuous measures.
    a_is_open_zero : bool
        True when the support is ``(0, b]`` for a measure with a density.
    total_mass : float
        ``mu([a, b])``.
    """

    a: float
    b: float
    mass_at_b: float
    a_is_open_zero: bool
    total_mass: float

    @property
    def gamma(self) -> float:
        """Large-wealth exponent ``1 - 1/b``."""
        return 1.0 - 1.0 / self.b


class Measure:
    """Common interface of the measure families."""

    kind: str = ""

    @property
    def support(self) -> SupportInfo:
        raise NotImplementedError

    def log_moment(self, z, t: float, k: int = 0, center: float = 0.0,
                   lo: float | None = None, hi: float | None = None) -> NDArray:
        """log int_{[lo,hi]} (y - center)^k exp(y z - y^2 t/2) mu(dy).

        ``center`` must not exceed the left end of the (restricted) support
        so that the integrand is non-negative. Returns ``-inf`` where the
        restricted measure is empty.
        """
        raise NotImplementedError

    def mass(self, lo: float, hi: float) -> float:
        """mu([lo, hi])."""
        raise NotImplementedError

    def _window(self, lo, hi) -> tuple[float, float]:
        s = self.support
        lo = s.a if lo is None else max(float(lo), s.a)
        hi = s.b if hi is None else min(float(hi), s.b)
        return lo, hi


def _check_finite(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ValidationError("must be a number", name) from None
    if not np.isfinite(v):
        raise ValidationError("must be finite", name)
    return v


@dataclass(frozen=True, eq=False)
class DiracMixture(Measure):
    """Weighted point masses ``sum_n w_n delta_{y_n}``.

    Parameters
    ----------
    points : array_like
        Strictly increasing, non-negative atoms with a positive largest atom.
    weights : array_like
        Positive weights, one per atom.
    """

    points: NDArray
    weights: NDArray
    kind: str = field(default="dirac", init=False)

    def __post_init__(self):
        y = np.atleast_1d(np.asarray(self.points, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if y.ndim != 1 or y.size == 0:
            raise ValidationError("must be a non-empty list", "points")
        if w.shape != y.shape:
            raise ValidationError(f"expected {y.size} weights, got {w.size}", "weights")
        if not np.all(np.isfinite(y)):
            raise ValidationError("must be finite", "points")
        if not np.all(np.isfinite(w)):
            raise ValidationError("must be finite", "weights")
        if np.any(np.diff(y) <= 0):
            raise ValidationError("must be strictly increasing", "points")
        if y[0] < 0:
            raise ValidationError("must be non-negative", "points")
        if y[-1] <= 0:
            raise ValidationError("largest point must be positive", "points")
        if np.any(w <= 0):
            raise ValidationError("must be positive", "weights")
        y.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", y)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_log_w", np.log(w))

    @property
    def support(self) -> SupportInfo:
        return SupportInfo(float(self.points[0]), float(self.points[-1]),
                           float(self.weights[-1]), False, float(self.weights.sum()))

    def log_moment(self, z, t, k=0, center=0.0, lo=None, hi=None):
        z = np.asarray(z, dtype=float)
        lo, hi = self._window(lo, hi)
        keep = (self.points >= lo) & (self.points <= hi)
        if not np.any(keep):
            return np.full(z.shape, -np.inf)
        y = self.points[keep]
        base = self._log_w[keep]
        if k:
            with np.errstate(divide="ignore"):
                base = base + k * np.log(y - center)
        # group the exponent first so the log-weights are not rounded against it
        terms = base + y * (z[..., None] - 0.5 * t * y)
        return logsumexp(terms, axis=-1)

    def mass(self, lo, hi):
        keep = (self.points >= lo) & (self.points <= hi)
        return float(self.weights[keep].sum())


def _segment_log_moment(lo: float, hi: float, z: NDArray, t: float, k: int,
                        center: float) -> NDArray:
    """Closed-form log int_lo^hi (y - center)^k exp(y z - y^2 t/2) dy.

    The integral is anchored at whichever point carries the peak of the
    Gaussian weight: an endpoint when the unconstrained maximiser ``z/t``
    lies outside ``[lo, hi]``, the maximiser itself otherwise. Anchoring at
    an endpoint turns every term into a one-sided Mills-type moment
    evaluated through ``erfcx``, which stays accurate far into the tails.
    """
    length = hi - lo
    out = np.empty(z.shape)
    # exp(-y^2 t/2) is 1 to within rounding on the whole segment
    if t * max(lo * lo, hi * hi) < 1e-17:
        up = z > 0
        edge = np.where(up, hi, lo)
        sign = np.where(up, -1.0, 1.0)
        q = exp_moments(np.abs(z), length, k)
        acc = np.zeros(z.shape)
        for i in range(k + 1):
            acc = acc + comb(k, i) * (edge - center) ** (k - i) * sign**i * q[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            return edge * z + np.log(acc)

    s = np.sqrt(t)
    c = z / t
    left = c <= lo
    right = c >= hi
    mid = ~(left | right)
    with np.errstate(divide="ignore", invalid="ignore"):
        for mask, edge, sgn in ((left, lo, 1.0), (right, hi, -1.0)):
            if not np.any(mask):
                continue
            zm = z[mask]
            g = sgn * (t * edge - zm)
            p = tail_moments(g / s, length * s, k)
            acc = np.zeros(zm.shape)
            for i in range(k + 1):
                acc = acc + comb(k, i) * (edge - center) ** (k - i) * sgn**i * t ** (-(i + 1) / 2) * p[i]
            out[mask] = edge * zm - 0.5 * t * edge**2 + np.log(acc)
        if np.any(mid):
            zm, cm = z[mid], c[mid]
            pa = tail_moments(0.0, s * (cm - lo), k)
            pb = tail_moments(0.0, s * (hi - cm), k)
            acc = np.zeros(zm.shape)
            for j in range(k + 1):
                jj = pb[j] + (-1.0) ** j * pa[j]
                acc = acc + comb(k, j) * (cm - center) ** (k - j) * s ** (-j) * jj
            out[mid] = zm * cm / 2.0 - np.log(s) + np.log(acc)
    return out


@dataclass(frozen=True, eq=False)
class LebesgueSegment(Measure):
    """Lebesgue measure (density one) on ``[a, b]``.

    ``a = 0`` denotes the half-open support ``(0, b]``.
    """

    a: float
    b: float
    kind: str = field(default="lebesgue", init=False)

    def __post_init__(self):
        a = _check_finite("a", self.a)
        try:
            b = float(self.b)
        except (TypeError, ValueError):
            raise ValidationError("must be a number", "b") from None
        if np.isinf(b):
            raise ValidationError("unbounded support is not supported; b must be finite", "b")
        b = _check_finite("b", b)
        if a < 0:
            raise ValidationError("must be non-negative", "a")
        if b <= a:
            raise ValidationError("must exceed a", "b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def support(self) -> SupportInfo:
        return SupportInfo(self.a, self.b, 0.0, self.a == 0.0, self.b - self.a)

    def log_moment(self, z, t, k=0, center=0.0, lo=None, hi=None):
        z = np.asarray(z, dtype=float)
        lo, hi = self._window(lo, hi)
        if hi <= lo:
            return np.full(z.shape, -np.inf)
        return _segment_log_moment(lo, hi, z, float(t), int(k), float(center))

    def mass(self, lo, hi):
        return max(0.0, min(hi, self.b) - max(lo, self.a))


@dataclass(frozen=True, eq=False)
class TabulatedDensity(Measure):
    """Density sampled on a uniform grid over ``[a, b]``.

    The samples are joined by a monotone cubic (PCHIP) interpolant, which
    keeps the density non-negative, and moments use composite
    Gauss-Legendre quadrature.

    Parameters
    ----------
    a, b : float
        Grid endpoints, ``0 <= a < b``.
    values : array_like
        Non-negative density samples at ``linspace(a, b, len(values))``.
    panels, order : int
        Composite quadrature layout.
    """

    a: float
    b: float
    values: NDArray
    panels: int = 64
    order: int = 16
    kind: str = field(default="density", init=False)

    def __post_init__(self):
        a, b = _check_finite("a", self.a), _check_finite("b", self.b)
        if a < 0:
            raise ValidationError("must be non-negative", "a")
        if b <= a:
            raise ValidationError("must exceed a", "b")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValidationError("need at least two samples", "values")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValidationError("must be finite and non-negative", "values")
        if not np.any(v > 0):
            raise ValidationError("density must not vanish identically", "values")
        if int(self.panels) < 1 or int(self.order) < 1:
            raise ValidationError("must be positive", "panels" if int(self.panels) < 1 else "order")
        v.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_interp", PchipInterpolator(np.linspace(a, b, v.size), v))
        nodes, logw = self._rule(a, b)
        object.__setattr__(self, "_nodes", nodes)
        object.__setattr__(self, "_logw", logw)
        object.__setattr__(self, "_mass", float(np.exp(logsumexp(logw))))

    def _rule(self, lo, hi):
        x, w = np.polynomial.legendre.leggauss(int(self.order))
        edges = np.linspace(lo, hi, int(self.panels) + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel() * np.maximum(self._interp(nodes), 0.0)
        with np.errstate(divide="ignore"):
            return nodes, np.log(weights)

    @property
    def support(self) -> SupportInfo:
        return SupportInfo(self.a, self.b, 0.0, self.a == 0.0, self._mass)

    def density(self, y) -> NDArray:
        """Interpolated density, zero outside ``[a, b]``."""
        y = np.asarray(y, dtype=float)
        inside = (y >= self.a) & (y <= self.b)
        return np.where(inside, np.maximum(self._interp(np.clip(y, self.a, self.b)), 0.0), 0.0)

    def log_moment(self, z, t, k=0, center=0.0, lo=None, hi=None):
        z = np.asarray(z, dtype=float)
        lo_, hi_ = self._window(lo, hi)
        if hi_ <= lo_:
            return np.full(z.shape, -np.inf)
        if lo is None and hi is None:
            y, lw = self._nodes, self._logw
        else:
            y, lw = self._rule(lo_, hi_)
        if k:
            with np.errstate(divide="ignore"):
                lw = lw + k * np.log(y - center)
        return logsumexp(lw + y * (z[..., None] - 0.5 * t * y), axis=-1)

    def mass(self, lo, hi):
        lo, hi = self._window(lo, hi)
        if hi <= lo:
            return 0.0
        return float(np.exp(logsumexp(self._rule(lo, hi)[1])))


def make_measure(kind: str, **params) -> Measure:
    """Build a measure from a family name and its parameters.

    Parameters
    ----------
    kind : {"dirac", "lebesgue", "density"}
    **params
        ``points, weights`` for Dirac mixtures, ``a, b`` for Lebesgue
        segments, ``a, b, values`` (optionally ``panels, order``) for
        tabulated densities.
    """
    builders = {"dirac": DiracMixture, "lebesgue": LebesgueSegment, "density": TabulatedDensity}
    if kind not in builders:
        raise ValidationError(f"unknown measure type {kind!r}; expected one of {sorted(builders)}", "type")
    try:
        return builders[kind](**params)
    except TypeError as exc:
        raise ValidationError(str(exc), "type") from None


def support(m: Measure) -> SupportInfo:
    """Support summary of `m`."""
    return m.support


def log_exp_moment(m: Measure, z: ArrayLike, t: float, k: int = 0):
    """log m_k(z, t), vectorised over `z`.

    Parameters
    ----------
    m : Measure
    z : array_like
        Spatial argument(s).
    t : float
        Time, ``t >= 0``.
    k : int
        Power of ``y``, between 0 and 4.
    """
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise ValidationError("must be finite and non-negative", "t")
    if int(k) != k or not 0 <= k <= MAX_ORDER:
        raise ValidationError(f"must be an integer in [0, {MAX_ORDER}]", "k")
    za = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(za)):
        raise ValidationError("must be finite", "z")
    out = m.log_moment(za, t, int(k))
    return float(out) if out.ndim == 0 else out


def exp_moment(m: Measure, z: ArrayLike, t: float, k: int = 0):
    """m_k(z, t) = int y^k exp(y z - y^2 t/2) mu(dy).

    Raises
    ------
    RangeError
        If the value overflows or underflows double precision.
    """
    lv = np.asarray(log_exp_moment(m, z, t, k))
    bad = (lv > LOG_MAX) | ((lv < LOG_MIN) & np.isfinite(lv))
    if np.any(bad):
        zb = np.broadcast_to(np.asarray(z, dtype=float), lv.shape)[bad].flat[0]
        zb = float(zb)
        raise RangeError(f"exp_moment of order {k} is out of floating-point range at z={zb!r}, t={float(t)!r}")
    out = np.exp(lv)
    return float(out) if out.ndim == 0 else out
