"""Turnpike diagnostics: limit classification, the Delta/G bound, and scans.

A temporal scan follows ``r(x0, t)/x0`` as ``t`` grows, which tends to the
left end ``a`` of the support; a spatial scan follows ``r(x, t0)/x`` as
``x`` grows, which tends to the right end ``b`` when ``b`` carries mass.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .expansions import dirac_expansion, lebesgue_expansion
from .harmonic import _check_t, inverse_z
from .measure import DiracMixture, LebesgueSegment, Measure

log = logging.getLogger(__name__)

# Tolerance on the relative slack of the diagnostic inequalities.
_SLACK = 1e-9
# Spread parameter of the lower bound used when the support starts at 0.
ZERO_A_THETA = 0.5


@dataclass(frozen=True)
class Classification:
    """Predicted turnpike behaviour of a measure.

    Attributes
    ----------
    spatial_limit : float or str
        ``b``, or ``"fails"`` when ``b`` carries no mass.
    temporal_limit : float
        ``a``.
    assumption1_holds : bool
        ``mu({b}) == 1``, the normalisation making ``u_x(x, 0) ~ x^(gamma-1)``.
    assumption2_holds : bool
        ``b < inf``.
    prudence_spatial, prudence_temporal : float
        ``2 - gamma`` and ``1 + 1/a`` (``inf`` when ``a = 0``).
    notes : tuple of str
    """

    spatial_limit: float | str
    temporal_limit: float
    assumption1_holds: bool
    assumption2_holds: bool
    prudence_spatial: float
    prudence_temporal: float
    notes: tuple[str, ...] = ()


def classify(m: Measure) -> Classification:
    """Classify the large-time and large-wealth limits of `m`."""
    s = m.support
    notes = []
    a1 = bool(abs(s.mass_at_b - 1.0) <= 1e-12)
    if s.mass_at_b > 0 and not a1:
        notes.append(f"rescaling the initial datum by mu({{b}}) = {s.mass_at_b:g} satisfies the unit-mass normalisation")
    if s.mass_at_b == 0:
        notes.append("no mass at b: the spatial limit is predicted to fail; scans report the growth-law ratio")
    spatial = s.b if s.mass_at_b > 0 else "fails"
    p_temp = np.inf if s.a == 0 else 1.0 + 1.0 / s.a
    return Classification(spatial, s.a, a1, bool(np.isfinite(s.b)), 2.0 - s.gamma, float(p_temp), tuple(notes))


def delta(m: Measure, x0: float, t: float) -> float:
    """``Delta(x0, t) = h^{-1}(x0, t)/t - a/2`` for ``t > 0``."""
    t = _check_t(t)
    if t == 0:
        raise ValueError("delta requires t > 0")
    return float(inverse_z(m, float(x0), t)) / t - 0.5 * m.support.a


def g_bound(m: Measure, x0: float, t: float) -> float:
    """Upper bound ``G(x0, t) >= r(x0, t) - a x0``.

    For ``Delta <= 0`` it is ``int (y - a) exp(-t y (y - a)/2) mu(dy)``;
    for ``Delta > 0`` it is ``2 Delta x0`` plus the same kind of integral
    restricted to ``[a + 2 Delta, b]`` with exponent ``t y (2 Delta + a - y)/2``.
    """
    t = _check_t(t)
    a = m.support.a
    d = delta(m, x0, t)
    if d <= 0:
        val = m.log_moment(np.asarray(0.5 * a * t), t, 1, center=a)
        return float(np.exp(val))
    z = t * (d + 0.5 * a)
    val = m.log_moment(np.asarray(z), t, 1, center=a, lo=a + 2.0 * d)
    return float(2.0 * d * x0 + np.exp(val))


def delta_bound_check(m: Measure, x0: float, t: float, d: float) -> bool:
    """Check the a-priori inequality satisfied by ``Delta``.

    - ``a > 0``, ``Delta < 0``: ``|Delta| <= log(mu([a, b])/x0) / (a t)``
    - ``a > 0``, ``Delta > 0``: ``x0 >= mu([a, a + Delta]) exp(t a Delta/2)``
    - ``a = 0``, ``Delta > 0``:
      ``x0 >= mu([Delta, (1+theta) Delta]) exp(t (1 - theta^2) Delta^2/2)``

    When ``a = 0``, ``Delta`` is positive exactly when ``h(0, t) < x0``,
    which holds for all large ``t``; for smaller ``t`` there is nothing to
    check.
    """
    s = m.support
    if s.a > 0:
        if d < 0:
            return abs(d) <= np.log(s.total_mass / x0) / (s.a * t) * (1 + _SLACK) + _SLACK
        if d > 0:
            lower = m.mass(s.a, s.a + d) * np.exp(0.5 * t * s.a * d)
            return x0 >= lower * (1 - _SLACK)
        return True
    if s.a_is_open_zero:
        th = ZERO_A_THETA
        lower = m.mass(d, (1 + th) * d) * np.exp(0.5 * t * (1 - th * th) * d * d)
        return d <= 0 or x0 >= lower * (1 - _SLACK)
    return True


@dataclass
class TurnpikeSeries:
    """Output of a temporal or spatial scan.

    Attributes
    ----------
    axis : {"temporal", "spatial"}
    fixed : float
        ``x0`` for temporal scans, ``t0`` for spatial scans.
    grid : ndarray
        Scan abscissae (times or wealth levels).
    ratio : ndarray
        ``r / x``.
    delta, g_bound : ndarray
        Temporal scans only (``nan`` otherwise).
    r_x : ndarray
        ``r_x`` along the scan.
    h_inv : ndarray
        ``h^{-1}`` along the scan.
    prediction, residual : ndarray
        Leading-order expansion of `predicted_quantity` and the absolute
        deviation of the numeric value from it (``nan`` when no closed-form
        expansion exists for the family).
    predicted_quantity : str
        ``"h_inv"``, ``"h_inv/t"`` or ``"r/x"``.
    limit : float or None
        Predicted limit of `ratio`; None when the limit is predicted to fail.
    growth_ratio : ndarray
        Spatial scans with no mass at ``b``: ``r / (x log log x)``, whose
        predicted limit is ``(1 - gamma)/t0``.
    checks : ndarray of bool
        Temporal scans: the sandwich ``0 <= r - a x0 <= G`` together with
        the a-priori ``Delta`` inequality, per grid point.
    """

    axis: str
    fixed: float
    grid: NDArray
    ratio: NDArray
    delta: NDArray
    g_bound: NDArray
    r_x: NDArray
    h_inv: NDArray
    prediction: NDArray
    residual: NDArray
    predicted_quantity: str
    limit: float | None
    growth_ratio: NDArray | None = None
    growth_limit: float | None = None
    checks: NDArray | None = None
    excess: NDArray | None = None
    label: str = field(default="")

    @property
    def converges(self) -> bool:
        return self.limit is not None

    def limit_residuals(self) -> NDArray:
        """``|ratio - limit|`` (or the growth-law deviation when no limit)."""
        if self.limit is not None:
            return np.abs(self.ratio - self.limit)
        if self.growth_ratio is not None and self.growth_limit is not None:
            return np.abs(self.growth_ratio - self.growth_limit)
        return np.full(self.grid.shape, np.nan)

    def convergence(self) -> tuple[float, float]:
        """Last limit residual and the ratio of the last two."""
        res = self.limit_residuals()
        last, prev = float(res[-1]), float(res[-2])
        return last, (last / prev if prev != 0 else np.nan)

    def to_csv(self) -> str:
        """CSV text with columns ``grid,ratio,delta,g_bound,prediction,residual``.

        Missing values are empty fields; floats use the shortest
        round-tripping representation and lines end with LF.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grid", "ratio", "delta", "g_bound", "prediction", "residual"])
        cols = (self.grid, self.ratio, self.delta, self.g_bound, self.prediction, self.residual)
        for row in zip(*cols):
            w.writerow([format_float(v) for v in row])
        return buf.getvalue()


def format_float(v) -> str:
    v = float(v)
    return "" if not np.isfinite(v) else repr(v)


def geometric_grid(start: float, stop: float, num: int = 41) -> NDArray:
    """``num`` points spaced evenly in log between `start` and `stop`."""
    return np.geomspace(float(start), float(stop), int(num))


def _temporal_prediction(m: Measure, x0: float, t: float) -> tuple[float, str]:
    if isinstance(m, DiracMixture):
        return dirac_expansion(m, x0, t)["h_inv_temporal"], "h_inv"
    if isinstance(m, LebesgueSegment):
        e = lebesgue_expansion(m, x0, t)
        if m.a == 0:
            return e["h_inv_temporal_zero_a"], "h_inv/t"
        return e["h_inv_temporal"], "h_inv"
    return np.nan, "h_inv"


def scan_temporal(m: Measure, x0: float = 1.0, grid=None) -> TurnpikeSeries:
    """Follow ``r(x0, t)/x0`` along a time grid.

    Parameters
    ----------
    m : Measure
    x0 : float
        Fixed wealth level.
    grid : array_like, optional
        Positive times; defaults to 41 geometric points on ``[1, 1e4]``.
    """
    x0 = float(x0)
    grid = geometric_grid(1.0, 1e4) if grid is None else np.asarray(grid, dtype=float)
    s = m.support
    n = grid.size
    cols = {k: np.full(n, np.nan) for k in ("ratio", "delta", "g", "rx", "z", "pred", "res", "exc")}
    checks = np.zeros(n, dtype=bool)
    quantity = "h_inv"
    for i, t in enumerate(grid):
        z = float(inverse_z(m, x0, t))
        za = np.asarray(z)
        l0, l1, l2 = (float(m.log_moment(za, t, k)) for k in range(3))
        d = z / t - 0.5 * s.a
        g = g_bound(m, x0, t)
        excess = x0 * float(np.exp(m.log_moment(za, t, 1, center=s.a) - l0))
        pred, quantity = _temporal_prediction(m, x0, t)
        numeric = z / t if quantity == "h_inv/t" else z
        cols["ratio"][i] = np.exp(l1 - l0)
        cols["delta"][i] = d
        cols["g"][i] = g
        cols["rx"][i] = np.exp(l2 - l1)
        cols["z"][i] = z
        cols["pred"][i] = pred
        cols["res"][i] = abs(numeric - pred)
        cols["exc"][i] = excess
        sandwich = (excess >= 0) and (excess <= g * (1 + _SLACK))
        checks[i] = sandwich and delta_bound_check(m, x0, t, d)
        if not checks[i]:
            log.warning("turnpike diagnostic violated at x0=%g, t=%g", x0, t)
    return TurnpikeSeries("temporal", x0, grid, cols["ratio"], cols["delta"], cols["g"], cols["rx"],
                          cols["z"], cols["pred"], cols["res"], quantity, s.a,
                          checks=checks, excess=cols["exc"], label=f"temporal x0={x0:g}")


def _spatial_prediction(m: Measure, x: float, t0: float) -> float:
    if isinstance(m, DiracMixture):
        return dirac_expansion(m, x, t0)["r_spatial"] / x
    if isinstance(m, LebesgueSegment):
        return lebesgue_expansion(m, x, t0)["r_spatial"] / x
    return np.nan


def scan_spatial(m: Measure, t0: float = 1.0, grid=None) -> TurnpikeSeries:
    """Follow ``r(x, t0)/x`` along a wealth grid.

    Parameters
    ----------
    m : Measure
    t0 : float
        Fixed time.
    grid : array_like, optional
        Positive wealth levels; defaults to 41 geometric points on ``[1, 1e8]``.
    """
    t0 = _check_t(t0)
    grid = geometric_grid(1.0, 1e8) if grid is None else np.asarray(grid, dtype=float)
    s = m.support
    z = np.asarray(inverse_z(m, grid, t0))
    l0, l1, l2 = (m.log_moment(z, t0, k) for k in range(3))
    ratio = np.exp(l1 - l0)
    pred = np.array([_spatial_prediction(m, x, t0) for x in grid])
    with np.errstate(invalid="ignore"):
        res = np.abs(ratio - pred)
    nan = np.full(grid.shape, np.nan)
    limit = s.b if s.mass_at_b > 0 else None
    growth = growth_lim = None
    if limit is None:
        lx = np.log(grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            llx = np.where(lx > 1, np.log(np.where(lx > 0, lx, 1.0)), np.nan)
            growth = ratio / llx
        growth_lim = (1.0 - s.gamma) / t0 if t0 > 0 else None
    return TurnpikeSeries("spatial", t0, grid, ratio, nan, nan.copy(), np.exp(l2 - l1), z, pred, res,
                          "r/x", limit, growth_ratio=growth, growth_limit=growth_lim,
                          label=f"spatial t0={t0:g}")
