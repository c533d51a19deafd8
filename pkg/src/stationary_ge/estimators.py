"""scikit-learn style wrappers.

``X`` is a single ordered series, either shape ``(n,)`` or ``(n, 1)``.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._math import log1mexp
from ._validation import DomainError, check_series
from .gedist import GEParams, ge_cdf, ge_fit_iid, ge_log_pdf, ge_sample
from .inference import bootstrap_ci, chain_loglik, fit_case1, fit_case2
from .process import DEFAULT_TIE_TOL, simulate


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class GEDistribution(TransformerMixin, BaseEstimator):
    """i.i.d. GE fit; ``transform`` returns probability-integral transforms.

    Parameters
    ----------
    bracket : tuple of float, optional
        Scale search interval; defaults to ``(0.01/mean, 100/mean)``.

    Attributes
    ----------
    shape_, scale_ : float
    loglik_ : float
    at_boundary_ : bool
    """

    def __init__(self, bracket=None):
        self.bracket = bracket

    def fit(self, X, y=None):
        x = check_series(X, "X", min_length=3, positive=True)
        res = ge_fit_iid(x, self.bracket)
        self.shape_ = res.params.shape
        self.scale_ = res.params.scale
        self.loglik_ = res.loglik
        self.at_boundary_ = res.at_boundary
        self.n_features_in_ = 1
        return self

    @property
    def params_(self):
        _check_fitted(self, "shape_")
        return GEParams(self.shape_, self.scale_)

    def transform(self, X):
        x = check_series(X, "X")
        return ge_cdf(x, self.params_).reshape(-1, 1)

    def score_samples(self, X):
        return ge_log_pdf(check_series(X, "X"), self.params_)

    def score(self, X, y=None):
        return float(self.score_samples(X).sum())

    def sample(self, n, random_state=None):
        return ge_sample(n, self.params_, random_state)


class GEProcess(BaseEstimator):
    """Maximum-likelihood fit of the stationary GE process.

    Parameters
    ----------
    model : {"equal", "unequal"}
        Equal shapes (one-dimensional profile search) or unequal shapes.
    tie_tol : float
        Relative tolerance for treating a pair as lying on the singular curve.
    n_bootstrap : int
        Parametric bootstrap replicates; 0 skips interval estimation.
    level : float
        Confidence level of the percentile intervals.
    random_state : int or None
        Seed for the bootstrap streams.

    Attributes
    ----------
    params_ : ProcessParams
    alpha0_, alpha1_, lambda_, loglik_ : float
    report_ : FitReport
    """

    def __init__(self, model="equal", tie_tol=DEFAULT_TIE_TOL, n_bootstrap=0, level=0.95,
                 random_state=None):
        self.model = model
        self.tie_tol = tie_tol
        self.n_bootstrap = n_bootstrap
        self.level = level
        self.random_state = random_state

    def fit(self, X, y=None):
        x = check_series(X, "X", min_length=4, positive=True)
        if self.model == "equal":
            report = fit_case1(x, tol=self.tie_tol)
        elif self.model == "unequal":
            report = fit_case2(x, tol=self.tie_tol)
        else:
            raise DomainError(f"model must be 'equal' or 'unequal', got {self.model!r}")
        if self.n_bootstrap:
            report = bootstrap_ci(x, report, B=self.n_bootstrap, level=self.level,
                                  seed=self.random_state)
        self.report_ = report
        self.params_ = report.estimates
        self.alpha0_ = report.estimates.alpha0
        self.alpha1_ = report.estimates.alpha1
        self.lambda_ = report.estimates.lam
        self.loglik_ = report.loglik
        self.n_features_in_ = 1
        return self

    def score(self, X, y=None):
        """Chain log-likelihood of ``X`` under the fitted parameters."""
        _check_fitted(self, "params_")
        return chain_loglik(check_series(X, "X", min_length=2), self.params_, self.tie_tol)

    def predict(self, X):
        """One-step-ahead conditional median of ``X[t+1]`` given ``X[t]``.

        Returns an array aligned with ``X[:-1]``.
        """
        _check_fitted(self, "params_")
        x = check_series(X, "X", min_length=2, positive=True)
        return _conditional_median(x[:-1], self.params_)

    def sample(self, n, random_state=None):
        _check_fitted(self, "params_")
        return simulate(n, self.params_, random_state).values


def _conditional_median(x, p, iters=80):
    """Median of ``X_{k+1}`` given ``X_k = x``, by bisection.

    With probability ``alpha0 / (alpha0 + alpha1)`` the shared innovation
    attained ``X_k``, pinning ``X_{k+1} >= curve_gamma(x)``.  Otherwise it is
    uniform below ``A(x)^alpha0``.  Either way ``X_{k+1}`` also takes a
    maximum with a fresh draw of CDF ``A(y)^alpha0``.
    """
    a0, a1, lam = p.alpha0, p.alpha1, p.lam
    w_shared = a0 / (a0 + a1)
    la_x = log1mexp(lam * np.asarray(x, dtype=float))

    def cond_cdf(y):
        lb = log1mexp(lam * y)
        fresh = np.exp(a0 * lb)
        # shared innovation produced x: X_{k+1} <= y iff curve point <= y
        on_curve = (a1 * lb >= a0 * la_x).astype(float)
        # shared innovation below the x threshold, uniform on [0, A(x)^a0]
        ratio = np.exp(np.minimum(a1 * lb - a0 * la_x, 0.0))
        return fresh * (w_shared * on_curve + (1.0 - w_shared) * ratio)

    lo = np.zeros_like(la_x)
    hi = np.full_like(la_x, 1.0)
    while np.any(cond_cdf(hi) < 0.5):
        hi = np.where(cond_cdf(hi) < 0.5, hi * 2.0, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = cond_cdf(mid) < 0.5
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return hi
