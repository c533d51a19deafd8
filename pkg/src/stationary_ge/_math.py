"""Numerically stable scalar/array helpers shared by the distribution code."""

import numpy as np

_LN2 = np.log(2.0)


def log1mexp(t):
    """Return ``log(1 - exp(-t))`` for ``t > 0``.

    Switches between ``log(-expm1(-t))`` and ``log1p(-exp(-t))`` at
    ``t = log 2`` so neither branch cancels catastrophically.  ``t <= 0``
    yields ``-inf``.
    """
    t = np.asarray(t, dtype=float)
    out = np.full(t.shape, -np.inf)
    small = (t > 0) & (t <= _LN2)
    large = t > _LN2
    with np.errstate(divide="ignore"):
        out[small] = np.log(-np.expm1(-t[small]))
        out[large] = np.log1p(-np.exp(-t[large]))
    return out if out.ndim else out[()]


def neg_log1mexp_of_log(v):
    """Return ``-log(1 - exp(v))`` for ``v < 0``.

    This is the exponential quantile applied to ``w = exp(v)`` without ever
    forming ``w`` when it would round to 0 or 1.
    """
    v = np.asarray(v, dtype=float)
    return -log1mexp(-v)


def log_cdf_base(x, lam):
    """``log(1 - exp(-lam * x))`` with ``-inf`` for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    return log1mexp(lam * x)
