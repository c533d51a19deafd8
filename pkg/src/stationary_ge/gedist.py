"""Two-parameter generalized exponential (GE) distribution.

``GE(shape, scale)`` has CDF ``(1 - exp(-scale * t)) ** shape`` on ``t > 0``.
Everything is evaluated through ``log(1 - exp(-scale * t))`` so that large
shapes and tiny arguments do not underflow.
"""

from dataclasses import dataclass

import numpy as np

from ._math import log1mexp, neg_log1mexp_of_log
from ._optim import grid_then_golden
from ._validation import DomainError, check_count, check_positive, check_rng, check_series

__all__ = [
    "GEParams",
    "IIDFit",
    "ge_cdf",
    "ge_log_cdf",
    "ge_pdf",
    "ge_log_pdf",
    "ge_quantile",
    "ge_sample",
    "ge_fit_iid",
    "ge_profile_loglik",
]


@dataclass(frozen=True)
class GEParams:
    """Shape and scale of a GE law."""

    shape: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "shape", check_positive(self.shape, "shape"))
        object.__setattr__(self, "scale", check_positive(self.scale, "scale"))


def ge_log_cdf(t, p):
    t = np.asarray(t, dtype=float)
    return p.shape * log1mexp(p.scale * t)


def ge_cdf(t, p):
    """CDF of ``GE(p.shape, p.scale)``; zero for ``t <= 0``."""
    return np.exp(ge_log_cdf(t, p))


def ge_log_pdf(t, p):
    t = np.asarray(t, dtype=float)
    pos = t > 0
    tt = np.where(pos, t, 1.0)
    lam_t = p.scale * tt
    out = (
        np.log(p.shape) + np.log(p.scale) - lam_t
        + (p.shape - 1.0) * log1mexp(lam_t)
    )
    out = np.where(pos, out, -np.inf)
    return out if out.ndim else out[()]


def ge_pdf(t, p):
    """Density of ``GE(p.shape, p.scale)``; zero for ``t <= 0``."""
    return np.exp(ge_log_pdf(t, p))


def ge_quantile(u, p):
    """Inverse CDF, ``-log(1 - u**(1/shape)) / scale``.

    Raises
    ------
    DomainError
        If any ``u`` lies outside the open interval ``(0, 1)``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("quantile level must lie in (0, 1)")
    return neg_log1mexp_of_log(np.log(u) / p.shape) / p.scale


def ge_sample(n, p, seed=None):
    """Draw ``n`` i.i.d. values by inverse-CDF sampling."""
    n = check_count(n, "n")
    rng = check_rng(seed)
    # 1 - random() lies in (0, 1]; log(1) = 0 maps to +inf, so reject it
    u = 1.0 - rng.random(n)
    u = np.where(u == 1.0, np.nextafter(1.0, 0.0), u)
    return neg_log1mexp_of_log(np.log(u) / p.shape) / p.scale


@dataclass
class IIDFit:
    """Result of :func:`ge_fit_iid`; unpacks as ``(params, loglik)``."""

    params: GEParams
    loglik: float
    at_boundary: bool
    nfev: int
    bracket: tuple

    def __iter__(self):
        return iter((self.params, self.loglik))


def _profile_terms(theta, x):
    theta = np.asarray(theta, dtype=float)
    s = log1mexp(np.multiply.outer(theta, x)).sum(axis=-1)
    return s


def ge_profile_loglik(theta, data):
    """Log-likelihood maximised over the shape for fixed scale ``theta``.

    With ``S = sum(log(1 - exp(-theta x)))`` the shape maximiser is
    ``-n / S`` and the profile is
    ``n log(-n/S) + n log(theta) - theta sum(x) - n - S``.
    """
    x = np.asarray(data, dtype=float)
    n = x.size
    s = _profile_terms(theta, x)
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = n * np.log(-n / s) + n * np.log(theta) - theta * x.sum() - n - s
    return out


def ge_fit_iid(data, bracket=None, rtol=1e-9):
    """Maximum-likelihood fit of ``GE`` to i.i.d. positive data.

    The shape is profiled out in closed form; the scale is found by a
    64-point log-grid scan of ``bracket`` followed by golden-section search.

    Parameters
    ----------
    data : array-like of shape (n,)
        Strictly positive observations, ``n >= 3``.
    bracket : tuple of float, optional
        Search interval for the scale. Defaults to
        ``(0.01 / mean, 100 / mean)``.
    rtol : float
        Relative width of the final scale interval.

    Returns
    -------
    IIDFit
        ``at_boundary`` is set when the best grid point is an end of the
        bracket, i.e. no interior maximum was located.
    """
    x = check_series(data, min_length=3, positive=True)
    if np.ptp(x) == 0:
        raise DomainError("all observations are identical; the MLE does not exist")
    if bracket is None:
        m = x.mean()
        bracket = (0.01 / m, 100.0 / m)
    lo, hi = (check_positive(b, "bracket") for b in bracket)
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket}")

    res = grid_then_golden(
        lambda th: float(ge_profile_loglik(th, x)),
        lo,
        hi,
        rtol=rtol,
        f_grid=lambda g: ge_profile_loglik(g, x),
    )
    theta = res.x
    shape = -x.size / float(_profile_terms(theta, x))
    return IIDFit(
        params=GEParams(shape, theta),
        loglik=float(res.fx),
        at_boundary=res.at_boundary,
        nfev=res.nfev,
        bracket=res.bracket,
    )
