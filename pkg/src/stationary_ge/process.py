"""The stationary GE process and its closed-form laws.

The process is the one-step moving maximum

    X_k = (1/lam) * max(Q(U_k ** (1/alpha0)), Q(U_{k-1} ** (1/alpha1)))

of i.i.d. uniforms ``U_0, U_1, ...`` with the unit exponential quantile
``Q(w) = -log(1 - w)``.  Marginals are ``GE(alpha0 + alpha1, lam)``, lags
beyond one are independent, and consecutive values share an innovation, which
puts positive mass on the curve ``(t, curve_gamma(t))``.

Conventions used throughout this module:

* ``A(x) = log(1 - exp(-lam x))`` is the base log-CDF, always computed with
  :func:`log1mexp`.
* ``alpha_star = max(alpha0, alpha1)`` is the exponent carried by an interior
  innovation shared between two neighbours.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ._math import log1mexp, neg_log1mexp_of_log
from ._validation import DomainError, check_count, check_positive, check_rng
from .gedist import GEParams

__all__ = [
    "ProcessParams",
    "Series",
    "PairRegion",
    "SingularDecomposition",
    "StoppingLaw",
    "ExponentialBaseline",
    "simulate",
    "simulate_paths",
    "prh_simulate",
    "joint_cdf_lag",
    "classify_pair",
    "classify_pairs",
    "curve_gamma",
    "curve_gamma_slope",
    "pair_density",
    "branch_densities",
    "log_pair_density",
    "singular_decomposition",
    "copula",
    "kendall_tau",
    "spearman_rho",
    "running_max_cdf",
    "running_min_survival",
    "running_min_mc_comparison",
    "stopping_pmf",
    "stopping_pgf",
    "stopping_mean",
    "simulate_stopping_times",
]

DEFAULT_TIE_TOL = 1e-9


@dataclass(frozen=True)
class ProcessParams:
    """Shapes ``alpha0``, ``alpha1`` and scale ``lam`` of a GE process."""

    alpha0: float
    alpha1: float
    lam: float = 1.0

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "lam"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))

    @property
    def delta(self):
        return self.alpha0 / (self.alpha0 + self.alpha1)

    @property
    def gamma(self):
        return self.alpha0 / self.alpha1

    @property
    def alpha_star(self):
        return max(self.alpha0, self.alpha1)

    @property
    def marginal(self):
        return GEParams(self.alpha0 + self.alpha1, self.lam)

    @classmethod
    def from_gamma(cls, gamma, alpha1, lam):
        return cls(gamma * alpha1, alpha1, lam)


@dataclass
class Series:
    """Ordered observations plus the affine map ``(raw - shift) / divisor``
    that produced them."""

    values: np.ndarray
    shift: float = 0.0
    divisor: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __getitem__(self, item):
        return self.values[item]

    def raw(self):
        """Undo the preprocessing."""
        return self.values * self.divisor + self.shift


class PairRegion(enum.IntEnum):
    """Where a consecutive pair falls relative to the singular curve."""

    C = 0
    S1 = 1
    S2 = 2


# ---------------------------------------------------------------------------
# simulation


class ExponentialBaseline:
    """Quantile ``-log(1 - w) / lam`` of the exponential baseline.

    Exposes :meth:`from_log` so the process can be evaluated from
    ``log w`` directly; this is what keeps large shapes from rounding
    ``w`` to 1.
    """

    def __init__(self, lam=1.0):
        self.lam = check_positive(lam, "lam")

    def __call__(self, w):
        return -np.log1p(-np.asarray(w, dtype=float)) / self.lam

    def from_log(self, log_w):
        return neg_log1mexp_of_log(log_w) / self.lam


def _uniforms(rng, shape):
    u = rng.random(shape)
    # random() can return exactly 0.0
    return np.where(u == 0.0, np.nextafter(0.0, 1.0), u)


def _maxify(log_u, alpha0, alpha1, base_quantile):
    """Apply the moving-maximum map along the last axis of ``log_u``.

    ``log_u[..., j]`` holds ``log U_j`` for ``j = 0..n``; the result has
    ``n`` entries.  Because the baseline quantile is increasing, the max is
    taken on ``log w`` before the (single) quantile evaluation, so equal
    shapes give bit-identical values at shared innovations.
    """
    own = log_u[..., 1:] / alpha0
    prev = log_u[..., :-1] / alpha1
    log_w = np.maximum(own, prev)
    from_log = getattr(base_quantile, "from_log", None)
    if from_log is not None:
        return from_log(log_w), own >= prev
    return np.asarray(base_quantile(np.exp(log_w)), dtype=float), own >= prev


def prh_simulate(n, alpha0, alpha1, base_quantile, seed=None, return_sources=False):
    """Simulate a proportional-reversed-hazard process.

    ``X_k = max(F0^{-1}(U_k^{1/alpha0}), F0^{-1}(U_{k-1}^{1/alpha1}))``
    with ``base_quantile = F0^{-1}`` strictly increasing on ``(0, 1)``.  The
    marginal CDF is ``F0 ** (alpha0 + alpha1)``.

    With ``return_sources`` a boolean array is returned as well, true where
    ``X_k`` was attained by its own innovation ``U_k``.
    """
    n = check_count(n, "n")
    alpha0 = check_positive(alpha0, "alpha0")
    alpha1 = check_positive(alpha1, "alpha1")
    rng = check_rng(seed)
    log_u = np.log(_uniforms(rng, n + 1))
    x, own = _maxify(log_u, alpha0, alpha1, base_quantile)
    series = Series(x)
    return (series, own) if return_sources else series


def simulate(n, p, seed=None, return_sources=False):
    """Simulate ``n`` consecutive values of the GE process.

    Draws ``U_0..U_n`` as ``Generator(seed).random(n + 1)`` and returns
    ``X_1..X_n``.  See :func:`prh_simulate` for ``return_sources``.
    """
    return prh_simulate(
        n, p.alpha0, p.alpha1, ExponentialBaseline(p.lam), seed, return_sources
    )


def simulate_paths(n_paths, n, p, seed=None):
    """Simulate independent paths as rows of an ``(n_paths, n)`` array."""
    n_paths = check_count(n_paths, "n_paths")
    n = check_count(n, "n")
    rng = check_rng(seed)
    log_u = np.log(_uniforms(rng, (n_paths, n + 1)))
    x, _ = _maxify(log_u, p.alpha0, p.alpha1, ExponentialBaseline(p.lam))
    return x


# ---------------------------------------------------------------------------
# joint laws


def joint_cdf_lag(x, y, m, p):
    """``P(X_k <= x, X_{k+m} <= y)`` for lag ``m >= 1``.

    Lags ``m >= 2`` factorise.  At ``m = 1`` the value is
    ``A(x)^alpha1 * A(y)^alpha0 * min(A(x)^alpha0, A(y)^alpha1)`` in CDF
    terms, ``A(t) = 1 - exp(-lam t)``.
    """
    m = check_count(m, "m")
    la = log1mexp(p.lam * np.asarray(x, dtype=float))
    lb = log1mexp(p.lam * np.asarray(y, dtype=float))
    s = p.alpha0 + p.alpha1
    if m >= 2:
        return np.exp(s * (la + lb))
    return np.exp(_log_joint_lag1(la, lb, p))


def _log_joint_lag1(la, lb, p):
    with np.errstate(invalid="ignore"):
        g = np.minimum(p.alpha0 * la, p.alpha1 * lb)
        return p.alpha1 * la + p.alpha0 * lb + g


def _region_codes(la, lb, p, tol):
    a = p.alpha0 * la
    b = p.alpha1 * lb
    with np.errstate(invalid="ignore"):
        on_curve = np.abs(a - b) <= tol * np.maximum(np.abs(a), np.abs(b))
    codes = np.where(a < b, PairRegion.S1.value, PairRegion.S2.value)
    codes = np.where(on_curve | (a == b), PairRegion.C.value, codes)
    return codes


def classify_pairs(x, y, p, tol=DEFAULT_TIE_TOL):
    """Vectorised :func:`classify_pair`; returns an int array of
    :class:`PairRegion` codes."""
    la = log1mexp(p.lam * np.asarray(x, dtype=float))
    lb = log1mexp(p.lam * np.asarray(y, dtype=float))
    return _region_codes(la, lb, p, tol)


def classify_pair(x, y, p, tol=DEFAULT_TIE_TOL):
    """Locate ``(x, y)`` relative to the singular curve.

    Compares ``a = alpha0 * A(x)`` and ``b = alpha1 * A(y)`` in log space:
    ``|a - b| <= tol * max(|a|, |b|)`` is ``C``, ``a < b`` is ``S1``, else
    ``S2``.  ``tol=0`` demands exact equality.
    """
    if not (x > 0 and y > 0):
        raise DomainError("classify_pair needs x > 0 and y > 0")
    return PairRegion(int(classify_pairs(x, y, p, tol)))


def curve_gamma(t, p):
    """Second coordinate of the singular curve through ``t``:
    ``-log(1 - (1 - exp(-lam t)) ** (alpha0/alpha1)) / lam``."""
    la = log1mexp(p.lam * np.asarray(t, dtype=float))
    return neg_log1mexp_of_log(p.gamma * la) / p.lam


def curve_gamma_slope(t, p):
    """Derivative of :func:`curve_gamma` (always positive)."""
    t = np.asarray(t, dtype=float)
    la = log1mexp(p.lam * t)
    g = p.gamma
    return np.exp(np.log(g) + (g - 1.0) * la - p.lam * t - log1mexp(-g * la))


def _log_f1(x, y, la, lb, p):
    s = p.alpha0 + p.alpha1
    return (
        np.log(p.alpha0) + np.log(s) + 2.0 * np.log(p.lam) - p.lam * (x + y)
        + (s - 1.0) * la + (p.alpha0 - 1.0) * lb
    )


def _log_f2(x, y, la, lb, p):
    s = p.alpha0 + p.alpha1
    return (
        np.log(p.alpha1) + np.log(s) + 2.0 * np.log(p.lam) - p.lam * (x + y)
        + (p.alpha1 - 1.0) * la + (s - 1.0) * lb
    )


def _log_f0(la, p):
    g = p.gamma
    exponent = p.alpha1 * (1.0 + g + g * g) - g
    return np.log(p.alpha1) + np.log(p.lam) + exponent * la + log1mexp(-g * la)


def log_pair_density(x, y, p, tol=DEFAULT_TIE_TOL):
    """Log of the three-branch pair density and the region codes.

    Off the curve this is the ordinary 2-D density (``f1`` on ``S1``, ``f2``
    on ``S2``).  On the curve it is ``f0(x)``, the density of the singular
    part against the measure ``|curve_gamma'(u)| du``.

    Returns
    -------
    log_density, codes : ndarray
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("pair density needs x > 0 and y > 0")
    la = log1mexp(p.lam * x)
    lb = log1mexp(p.lam * y)
    codes = _region_codes(la, lb, p, tol)
    out = np.where(
        codes == PairRegion.S1,
        _log_f1(x, y, la, lb, p),
        np.where(codes == PairRegion.S2, _log_f2(x, y, la, lb, p), _log_f0(la, p)),
    )
    return out, codes


def pair_density(x, y, p, tol=DEFAULT_TIE_TOL):
    """Return ``(region, value)`` of the pair density at a single point."""
    logf, code = log_pair_density(x, y, p, tol)
    return PairRegion(int(code)), float(np.exp(logf))


def branch_densities(x, y, p):
    """Evaluate ``f1``, ``f2`` (at ``(x, y)``) and ``f0`` (at ``x``)
    regardless of region; used by quadrature checks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    la = log1mexp(p.lam * x)
    lb = log1mexp(p.lam * y)
    return (
        np.exp(_log_f1(x, y, la, lb, p)),
        np.exp(_log_f2(x, y, la, lb, p)),
        np.exp(_log_f0(la, p)),
    )


@dataclass(frozen=True)
class SingularDecomposition:
    """``F = p * F_a + (1 - p) * F_s`` for the lag-one joint CDF."""

    p: float
    params: ProcessParams = field(repr=False)

    def _pieces(self, x, y):
        pr = self.params
        la = log1mexp(pr.lam * np.asarray(x, dtype=float))
        lb = log1mexp(pr.lam * np.asarray(y, dtype=float))
        a0, a1 = pr.alpha0, pr.alpha1
        big = a0 * a0 + a1 * a1 + a0 * a1
        log_g = np.minimum(a0 * la, a1 * lb)
        fs = np.exp(big / (a0 * a1) * log_g)
        joint = np.exp(_log_joint_lag1(la, lb, pr))
        return joint, fs

    def absolutely_continuous(self, x, y):
        joint, fs = self._pieces(x, y)
        pr = self.params
        sq = pr.alpha0**2 + pr.alpha1**2
        big = sq + pr.alpha0 * pr.alpha1
        return big / sq * joint - pr.alpha0 * pr.alpha1 / sq * fs

    def singular(self, x, y):
        return self._pieces(x, y)[1]

    def cdf(self, x, y):
        return self.p * self.absolutely_continuous(x, y) + (1.0 - self.p) * self.singular(x, y)


def singular_decomposition(p):
    """Split the lag-one joint CDF into absolutely continuous and singular
    parts; ``1 - p`` is the probability of landing on the curve."""
    a0, a1 = p.alpha0, p.alpha1
    sq = a0 * a0 + a1 * a1
    return SingularDecomposition(p=sq / (sq + a0 * a1), params=p)


# ---------------------------------------------------------------------------
# copula and dependence


def copula(u, v, delta):
    """Lag-one copula ``min(u * v**delta, u**(1-delta) * v)``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
        raise DomainError("copula arguments must lie in [0, 1]")
    with np.errstate(invalid="ignore", divide="ignore"):
        first = u * v**delta
        second = u ** (1.0 - delta) * v
    return np.where(u**delta <= v ** (1.0 - delta), first, second)


def _check_delta(delta):
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return float(delta)


def kendall_tau(delta):
    """Kendall's tau of the lag-one copula.

    ``d(1-d)(1-d(1-d)) / (d**3 + d(1-d) + d**2 (1-d)**2 + (1-d)**3)``, which
    simplifies to ``t / (1 - t)`` with ``t = d(1-d)``.
    """
    d = _check_delta(delta)
    e = 1.0 - d
    return d * e * (1.0 - d * e) / (d**3 + d * e + d * d * e * e + e**3)


def spearman_rho(delta):
    """Spearman's rho of the lag-one copula, ``3d(1-d) / (d**2 - d + 2)``."""
    d = _check_delta(delta)
    return 3.0 * d * (1.0 - d) / (d * d - d + 2.0)


# ---------------------------------------------------------------------------
# extremes


def running_max_cdf(x, n, p):
    """``P(max(X_1..X_n) <= x) = (1 - exp(-lam x)) ** (alpha0 + alpha1 + (n-1) alpha_star)``.

    The ``n - 1`` interior innovations are each shared by two neighbours and
    must clear the stricter of the two thresholds, hence ``max(alpha0,
    alpha1)``.
    """
    n = check_count(n, "n")
    la = log1mexp(p.lam * np.asarray(x, dtype=float))
    return np.exp((p.alpha0 + p.alpha1 + (n - 1) * p.alpha_star) * la)


def running_min_survival(x, n, p):
    """Factorised approximation of ``P(min(X_1..X_n) >= x)``.

    Computes ``P(X_2 >= x | X_1 >= x) ** (n-1) * P(X_1 >= x)`` with the
    lag-one conditional survival taken from the joint law.  Exact for
    ``n <= 2``; for larger ``n`` it treats the chain as Markov, so use
    :func:`running_min_mc_comparison` to see how far off it is.
    """
    n = check_count(n, "n")
    la = log1mexp(p.lam * np.asarray(x, dtype=float))
    F = np.exp((p.alpha0 + p.alpha1) * la)
    surv = 1.0 - F
    shared = -np.expm1(p.alpha_star * la)
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = np.where(surv > 0, 1.0 - F * shared / surv, 0.0)
    return cond ** (n - 1) * surv


def running_min_mc_comparison(x, n, p, n_paths=10**6, seed=None, chunk=200_000):
    """Compare :func:`running_min_survival` with simulation.

    Returns a dict with ``formula``, ``monte_carlo``, ``deviation``
    (formula minus Monte Carlo) and the binomial standard error ``se``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    hits = np.zeros(x.shape)
    rng = check_rng(seed)
    done = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        mins = simulate_paths(m, n, p, rng).min(axis=1)
        hits += (mins[:, None] >= x[None, :]).sum(axis=0)
        done += m
    mc = hits / n_paths
    formula = running_min_survival(x, n, p)
    return {
        "formula": formula,
        "monte_carlo": mc,
        "deviation": formula - mc,
        "se": np.sqrt(np.clip(mc * (1 - mc), 1e-300, None) / n_paths),
    }


# ---------------------------------------------------------------------------
# stopping time


@dataclass(frozen=True)
class StoppingLaw:
    """First index ``N`` with ``X_N > level``.

    ``prob = 1 - exp(-lam * level)``; ``P(N = 1) = 1 - prob**S`` and
    ``P(N = k) = prob**(S + (k-2) a*) (1 - prob**a*)`` for ``k >= 2`` with
    ``S = alpha0 + alpha1`` and ``a* = alpha_star``.
    """

    level: float
    params: ProcessParams

    def __post_init__(self):
        object.__setattr__(self, "level", check_positive(self.level, "level"))

    @property
    def prob(self):
        return -np.expm1(-self.params.lam * self.level)

    @property
    def alpha_star(self):
        return self.params.alpha_star

    @property
    def _logs(self):
        lp = float(log1mexp(self.params.lam * self.level))
        return lp, self.params.alpha0 + self.params.alpha1, self.alpha_star


def stopping_pmf(k, law):
    """``P(N = k)`` for integer ``k >= 1`` (array input allowed)."""
    k = np.asarray(k)
    if np.any(k < 1) or not np.issubdtype(k.dtype, np.integer):
        raise DomainError("k must be an integer >= 1")
    lp, s, a = law._logs
    first = -np.expm1(s * lp)
    later = np.exp((s + (k - 2) * a) * lp) * -np.expm1(a * lp)
    out = np.where(k == 1, first, later)
    return out if out.ndim else float(out)


def stopping_pgf(s, law):
    """``E[s**N] = s (1 - p^S) + s**2 p^S (1 - p^a) / (1 - p^a s)``.

    Raises
    ------
    DomainError
        If ``|s| >= p ** -alpha_star`` (outside the radius of convergence).
    """
    lp, S, a = law._logs
    q = np.exp(a * lp)
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) * q >= 1.0):
        raise DomainError("s lies outside the radius of convergence of the PGF")
    pS = np.exp(S * lp)
    out = s * (1.0 - pS) + s * s * pS * (1.0 - q) / (1.0 - q * s)
    return out if out.ndim else float(out)


def stopping_mean(law):
    """``E[N] = G'(1) = 1 - p^S + p^S (2 - p^a) / (1 - p^a)``."""
    lp, S, a = law._logs
    q = np.exp(a * lp)
    pS = np.exp(S * lp)
    return float(1.0 - pS + pS * (2.0 - q) / (1.0 - q))


def simulate_stopping_times(law, n_paths, seed=None, chunk=200_000, max_steps=100_000):
    """Monte Carlo draws of ``N``, generated innovation by innovation."""
    n_paths = check_count(n_paths, "n_paths")
    p = law.params
    rng = check_rng(seed)
    # X_k > L  <=>  max(log U_k / a0, log U_{k-1} / a1) > log(1 - exp(-lam L))
    thresh = float(log1mexp(p.lam * law.level))
    out = np.empty(n_paths, dtype=np.int64)
    start = 0
    while start < n_paths:
        m = min(chunk, n_paths - start)
        prev = np.log(_uniforms(rng, m)) / p.alpha1
        times = np.zeros(m, dtype=np.int64)
        alive = np.arange(m)
        for k in range(1, max_steps + 1):
            lu = np.log(_uniforms(rng, alive.size))
            exceeded = np.maximum(lu / p.alpha0, prev) > thresh
            times[alive[exceeded]] = k
            keep = ~exceeded
            alive = alive[keep]
            prev = lu[keep] / p.alpha1
            if alive.size == 0:
                break
        else:
            raise RuntimeError("stopping time exceeded max_steps")
        out[start:start + m] = times
        start += m
    return out
