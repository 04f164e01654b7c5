"""Market clock, closed-form optimal wealth, and Monte Carlo checks.

The market has one risky asset with volatility ``sigma`` and a piecewise
constant market price of risk ``lambda(t)``; the interest rate is zero.
Under the optimal policy

    X*_t  = h(h^{-1}(x, 0) + A_t + M_t, A_t),
    pi*_t = (lambda_t / sigma) h_z(h^{-1}(x, 0) + A_t + M_t, A_t),

with ``A_t = int_0^t lambda^2`` and ``M_t = int_0^t lambda dW``, so only the
Gaussian increments of ``M`` need to be simulated.

Random numbers come from one Philox stream per path, keyed by the seed and
the path index, so any path can be regenerated on its own.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr

from .errors import ValidationError
from .harmonic import _check_t, inverse_z
from .measure import Measure
from .performance import utility_curve, utility_drift, utility_from_z

log = logging.getLogger(__name__)

ABSORPTION_FLOOR = 1e-12
_CHUNK = 4096


@dataclass(frozen=True)
class MarketModel:
    """Piecewise-constant market price of risk.

    Parameters
    ----------
    lambdas : sequence of float
        ``lambda`` on consecutive intervals ``[0, t_1), [t_1, t_2), ...``;
        the last value holds for all later times.
    breakpoints : sequence of float
        Interior breakpoints ``0 < t_1 < t_2 < ...`` (one fewer than
        `lambdas`).
    sigma : float
        Volatility of the risky asset.
    """

    lambdas: tuple
    breakpoints: tuple = ()
    sigma: float = 1.0

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lambdas, dtype=float))
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float)) if len(self.breakpoints) else np.zeros(0)
        if lam.size == 0 or not np.all(np.isfinite(lam)):
            raise ValidationError("must be a non-empty list of finite numbers", "lambda")
        if bp.size != lam.size - 1:
            raise ValidationError(f"expected {lam.size - 1} breakpoints for {lam.size} lambda values", "breakpoints")
        if bp.size and (bp[0] <= 0 or np.any(np.diff(bp) <= 0) or not np.all(np.isfinite(bp))):
            raise ValidationError("must be positive, finite and strictly increasing", "breakpoints")
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValidationError("must be positive", "sigma")
        object.__setattr__(self, "lambdas", tuple(float(v) for v in lam))
        object.__setattr__(self, "breakpoints", tuple(float(v) for v in bp))
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def constant(cls, lam: float, sigma: float = 1.0) -> "MarketModel":
        return cls((float(lam),), (), sigma)

    @property
    def clock_unbounded(self) -> bool:
        """True when ``A_t -> inf``, i.e. the final ``lambda`` is non-zero."""
        return self.lambdas[-1] != 0.0

    def lam(self, t: ArrayLike) -> NDArray:
        """``lambda(t)``, right-continuous at breakpoints."""
        idx = np.searchsorted(np.asarray(self.breakpoints), np.asarray(t, dtype=float), side="right")
        return np.asarray(self.lambdas)[idx]

    def clock(self, t: ArrayLike):
        """``A_t = int_0^t lambda(s)^2 ds``, exact for the piecewise profile."""
        t = np.asarray(t, dtype=float)
        edges = np.concatenate(([0.0], self.breakpoints, [np.inf]))
        lam2 = np.asarray(self.lambdas) ** 2
        seg = np.clip(t[..., None] - edges[:-1], 0.0, np.diff(edges))
        out = np.sum(seg * lam2, axis=-1)
        return float(out) if out.ndim == 0 else out


def a_process(mkt: MarketModel, times: ArrayLike):
    """``A_t`` at the given times."""
    return mkt.clock(times)


def _stream_key(seed: int) -> NDArray:
    return np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)


def path_normals(seed: int, path_ids: ArrayLike, n: int) -> NDArray:
    """Standard normals, one row per path, from per-path Philox streams.

    Row ``i`` depends only on ``(seed, path_ids[i])``: the path index sits
    in the top word of the 256-bit Philox counter.
    """
    key = _stream_key(seed)
    ids = np.asarray(path_ids, dtype=np.uint64)
    out = np.empty((ids.size, int(n)))
    for row, pid in enumerate(ids):
        gen = np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(pid)]))
        out[row] = gen.standard_normal(int(n))
    return out


@dataclass(frozen=True)
class WealthPath:
    """One simulated path of optimal wealth and portfolio."""

    path_id: int
    times: NDArray
    clock: NDArray
    x_star: NDArray
    pi_star: NDArray


@dataclass(frozen=True)
class PathSet:
    """A batch of simulated paths stored column-wise.

    Iterating or indexing yields `WealthPath` views.

    Attributes
    ----------
    times, clock : ndarray, shape (n_times,)
    x_star, pi_star : ndarray, shape (n_paths, n_times)
    z : ndarray, shape (n_paths, n_times)
        Spatial argument ``h^{-1}(x, 0) + A_t + M_t`` of each point.
    seed : int
    """

    times: NDArray
    clock: NDArray
    x_star: NDArray
    pi_star: NDArray
    z: NDArray
    seed: int

    def __len__(self) -> int:
        return self.x_star.shape[0]

    def __getitem__(self, i: int) -> WealthPath:
        return WealthPath(int(i), self.times, self.clock, self.x_star[i], self.pi_star[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def to_csv(self) -> str:
        """Long-format CSV with columns ``time,path_id,x_star,pi_star``."""
        lines = ["time,path_id,x_star,pi_star"]
        for p in range(len(self)):
            for k, t in enumerate(self.times):
                lines.append(f"{float(t)!r},{p},{float(self.x_star[p, k])!r},{float(self.pi_star[p, k])!r}")
        return "\n".join(lines) + "\n"


def _check_sim(x, horizon, n_steps, n_paths):
    if not np.isfinite(x) or x <= 0:
        raise ValidationError("must be positive", "x")
    if not np.isfinite(horizon) or horizon <= 0:
        raise ValidationError("must be positive", "horizon")
    if int(n_steps) < 1:
        raise ValidationError("must be at least 1", "steps")
    if int(n_paths) < 1:
        raise ValidationError("must be at least 1", "paths")


def simulate_optimal(m: Measure, mkt: MarketModel, x: float, horizon: float, n_steps: int,
                     n_paths: int, seed: int) -> PathSet:
    """Simulate optimal wealth and portfolio on a uniform time grid.

    The closed form is exact at the grid times, so the only randomness
    used is ``M`` at the grid, with independent increments of variance
    ``A_{t_{k+1}} - A_{t_k}``.
    """
    x, horizon = float(x), float(horizon)
    _check_sim(x, horizon, n_steps, n_paths)
    times = np.linspace(0.0, horizon, int(n_steps) + 1)
    clock = np.asarray(mkt.clock(times))
    z0 = float(inverse_z(m, x, 0.0))
    sd = np.sqrt(np.diff(clock))
    normals = path_normals(seed, np.arange(n_paths), n_steps)
    M = np.concatenate((np.zeros((n_paths, 1)), np.cumsum(normals * sd[None, :], axis=1)), axis=1)
    z = z0 + clock[None, :] + M
    x_star = np.empty_like(z)
    pi_star = np.empty_like(z)
    # lambda acting on the step that starts at each grid time
    lam = mkt.lam(times) / mkt.sigma
    for k, A in enumerate(clock):
        l0 = m.log_moment(z[:, k], A, 0)
        l1 = m.log_moment(z[:, k], A, 1)
        x_star[:, k] = np.exp(l0)
        pi_star[:, k] = lam[k] * np.exp(l1)
    return PathSet(times, clock, x_star, pi_star, z, int(seed))


def wealth_cdf(m: Measure, mkt: MarketModel, x: float, y: ArrayLike, t: float):
    """``P(X*_t <= y)`` from the Gaussian law of ``M_t``.

    ``Phi((h^{-1}(y, A_t) - h^{-1}(x, 0) - A_t) / sqrt(A_t))``, or a unit
    step at ``x`` when ``A_t = 0``.
    """
    t = _check_t(t)
    A = float(mkt.clock(t))
    y = np.asarray(y, dtype=float)
    if A == 0.0:
        out = (y >= x).astype(float)
    else:
        z0 = float(inverse_z(m, float(x), 0.0))
        out = ndtr((np.asarray(inverse_z(m, y, A)) - z0 - A) / np.sqrt(A))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MartingaleResult:
    """Monte Carlo estimate of ``E[u(X_T, A_T)]`` against ``u(x, 0)``.

    Utilities are normalised as ``u(., t) - u(x_ref, 0)`` so that one
    additive constant is shared across times.

    Attributes
    ----------
    estimate, std_error : float
    reference : float
        ``u(x, 0) - u(x_ref, 0)``.
    strategy : str
        ``"optimal"`` or ``"fraction=<kappa>"``.
    n_paths, seed : int
    floor_hits : int
        Suboptimal paths absorbed at the wealth floor.
    """

    estimate: float
    reference: float
    std_error: float
    strategy: str
    n_paths: int
    seed: int
    floor_hits: int = 0

    @property
    def z_score(self) -> float:
        return (self.estimate - self.reference) / self.std_error if self.std_error > 0 else 0.0

    def is_martingale(self, n_se: float = 3.0) -> bool:
        return abs(self.estimate - self.reference) <= n_se * self.std_error

    def is_supermartingale(self, n_se: float = 3.0) -> bool:
        return self.estimate <= self.reference + n_se * self.std_error


def _summ(values: NDArray):
    n = values.size
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(n)) if n > 1 else 0.0


def martingale_check(m: Measure, mkt: MarketModel, x: float, horizon: float, n_paths: int,
                     seed: int, fraction: float | None = None, n_steps: int | None = None,
                     x_ref: float | None = None) -> MartingaleResult:
    """Estimate ``E[u(X_T, A_T)]`` under the optimal or a constant-fraction policy.

    Parameters
    ----------
    fraction : float, optional
        If given, invest ``pi_t = fraction * X_t`` and integrate the wealth
        SDE by Euler-Maruyama with an absorbing floor; otherwise use the
        closed-form optimal wealth.
    n_steps : int, optional
        Euler steps for the constant-fraction policy; at least 1000 per
        unit of time.
    x_ref : float, optional
        Reference wealth of the utility normalisation (default `x`).
    """
    x, horizon = float(x), float(horizon)
    _check_sim(x, horizon, 1, n_paths)
    x_ref = x if x_ref is None else float(x_ref)
    A = float(mkt.clock(horizon))
    drift = utility_drift(m, x_ref, A)
    reference = float(utility_curve(m, x_ref, [x], 0.0)[0])

    if fraction is None:
        z0 = float(inverse_z(m, x, 0.0))
        normals = path_normals(seed, np.arange(n_paths), 1)[:, 0]
        zT = z0 + A + np.sqrt(A) * normals
        z_ref = float(inverse_z(m, x_ref, A))
        values = utility_from_z(m, z_ref, zT, A) + drift
        est, se = _summ(values)
        return MartingaleResult(est, reference, se, "optimal", int(n_paths), int(seed))

    n_steps = int(np.ceil(1000 * horizon)) if n_steps is None else int(n_steps)
    if n_steps < 1000 * horizon:
        raise ValidationError("need at least 1000 steps per unit time", "steps")
    times = np.linspace(0.0, horizon, n_steps + 1)
    dt = np.diff(times)
    lam = mkt.lam(times[:-1])
    vol = mkt.sigma * float(fraction)
    xT = np.empty(n_paths)
    hits = 0
    for start in range(0, n_paths, _CHUNK):
        ids = np.arange(start, min(start + _CHUNK, n_paths))
        dW = path_normals(seed, ids, n_steps) * np.sqrt(dt)[None, :]
        X = np.full(ids.size, x)
        alive = np.ones(ids.size, dtype=bool)
        for k in range(n_steps):
            X = np.where(alive, X * (1.0 + vol * (lam[k] * dt[k] + dW[:, k])), X)
            dead = alive & (X <= ABSORPTION_FLOOR)
            X[dead] = ABSORPTION_FLOOR
            alive &= ~dead
        hits += int(np.count_nonzero(~alive))
        xT[ids] = X
    if hits:
        log.warning("%d of %d paths absorbed at the wealth floor", hits, n_paths)
    values = utility_curve(m, x_ref, xT, A) + drift
    est, se = _summ(values)
    return MartingaleResult(est, reference, se, f"fraction={float(fraction)!r}", int(n_paths), int(seed), hits)
