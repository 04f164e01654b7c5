"""Principal branch of the Lambert W function."""

from __future__ import annotations

import numpy as np
from scipy.special import lambertw

from .errors import ValidationError

_BRANCH = -np.exp(-1.0)


def lambert_w(x: float) -> float:
    """Solve ``w exp(w) = x`` for ``w >= -1`` (principal branch).

    Wraps `scipy.special.lambertw`, returning ``-1`` at the rounded branch
    point ``-1/e`` where scipy yields ``nan``.

    Raises
    ------
    ValidationError
        If ``x < -1/e`` or `x` is ``nan``/``-inf``.

    Examples
    --------
    >>> lambert_w(np.e)
    1.0
    """
    x = float(x)
    if np.isnan(x) or x == -np.inf:
        raise ValidationError("must be a number >= -1/e", "x")
    if x <= _BRANCH:
        if x >= _BRANCH * (1 + 4 * np.finfo(float).eps):
            return -1.0
        raise ValidationError(f"{x!r} is below the branch point -1/e", "x")
    return float(lambertw(x).real)


def lambert_w_exp(log_x: float, tol: float = 1e-15, max_iter: int = 60) -> float:
    """``W(exp(log_x))`` for arguments too large to exponentiate.

    Newton iteration on ``w + log w = log_x``, used for ``log_x > 1``.
    """
    log_x = float(log_x)
    if log_x <= 1.0:
        return lambert_w(np.exp(log_x))
    w = log_x - np.log(log_x)
    for _ in range(max_iter):
        step = (w + np.log(w) - log_x) * w / (w + 1.0)
        w -= step
        if abs(step) <= tol * w:
            break
    return float(w)
