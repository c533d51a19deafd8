"""Model checks for a fitted GE process.

Under the model, alternate observations ``x_1, x_3, ...`` and ``x_2, x_4,
...`` are each i.i.d. ``GE(alpha0 + alpha1, lam)`` because the process is
one-dependent.  The checks here fit a GE law to each half, test the fit with
Kolmogorov-Smirnov, test independence with a runs test, and compare sample
autocorrelations with bands simulated from the fitted process.

KS p-values ignore that the parameters were estimated from the same data;
they are conservative and the report says so.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._validation import DomainError, check_count, check_series
from .gedist import GEParams, ge_cdf, ge_fit_iid
from .process import ProcessParams, Series, simulate_paths

__all__ = [
    "KSResult",
    "RunsResult",
    "GofReport",
    "split_subsequences",
    "kolmogorov_sf",
    "ks_test_ge",
    "runs_test",
    "acf",
    "acf_null_band",
    "run_gof",
]


def split_subsequences(s):
    """Return ``(odd, even)`` in 1-based positions, order preserved."""
    x = check_series(s, min_length=4)
    meta = {}
    if isinstance(s, Series):
        meta = {"shift": s.shift, "divisor": s.divisor}
    return Series(x[0::2], **meta), Series(x[1::2], **meta)


def kolmogorov_sf(t, terms=100):
    """Asymptotic Kolmogorov survival ``2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 t^2)``.

    Below ``t = 1.18`` the alternating series converges slowly, so the
    equivalent theta-function form
    ``1 - sqrt(2 pi)/t sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 t^2))`` is used.
    """
    if t <= 0:
        return 1.0
    if t < 1.18:
        w = np.pi**2 / (8.0 * t * t)
        k = np.arange(1, 8)
        cdf = np.sqrt(2.0 * np.pi) / t * np.exp(-((2 * k - 1) ** 2) * w).sum()
        return float(min(max(1.0 - cdf, 0.0), 1.0))
    total = 0.0
    for k in range(1, terms + 1):
        term = np.exp(-2.0 * k * k * t * t)
        total += term if k % 2 else -term
        if term < 1e-17 * total:
            break
    return float(min(max(2.0 * total, 0.0), 1.0))


@dataclass
class KSResult:
    distance: float
    pvalue: float
    n: int
    effective_statistic: float
    params_estimated: bool = False
    small_sample_correction: bool = True

    def __iter__(self):
        return iter((self.distance, self.pvalue))


def ks_test_ge(data, p, params_estimated=False, small_sample_correction=True):
    """One-sample KS test against ``GE(p.shape, p.scale)``.

    The distance is exact over the order statistics.  The p-value applies the
    asymptotic series to ``(sqrt(n) + 0.12 + 0.11/sqrt(n)) * D``, or to
    ``sqrt(n) * D`` when ``small_sample_correction`` is off.
    """
    x = np.sort(check_series(data, min_length=5))
    n = x.size
    F = ge_cdf(x, p)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    en = np.sqrt(n)
    t = (en + 0.12 + 0.11 / en) * d if small_sample_correction else en * d
    return KSResult(d, kolmogorov_sf(t), n, float(t), params_estimated, small_sample_correction)


@dataclass
class RunsResult:
    runs: int
    n_above: int
    n_below: int
    z: float
    pvalue: float

    def __float__(self):
        return self.pvalue


def runs_test(data):
    """Wald-Wolfowitz runs test about the sample median.

    Values equal to the median are dropped.  Uses the normal approximation
    with a 0.5 continuity correction; the p-value is two-sided.
    """
    x = check_series(data, min_length=10)
    if np.ptp(x) == 0:
        raise DomainError("runs test needs at least two distinct values")
    med = np.median(x)
    signs = x[x != med] > med
    n1 = int(signs.sum())
    n2 = int(signs.size - n1)
    if n1 == 0 or n2 == 0:
        raise DomainError("all values fall on one side of the median")
    runs = int(1 + np.count_nonzero(signs[1:] != signs[:-1]))
    N = n1 + n2
    mean = 2.0 * n1 * n2 / N + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - N) / (N * N * (N - 1.0))
    dev = runs - mean
    if abs(dev) <= 0.5:
        z = 0.0
    else:
        z = (dev - 0.5 * np.sign(dev)) / np.sqrt(var)
    pval = float(min(1.0, 2.0 * special.ndtr(-abs(z))))
    return RunsResult(runs, n1, n2, float(z), pval)


def acf(series, lag):
    """Mean-centred sample autocorrelation at ``lag``.

    ``sum_{t} (x_t - m)(x_{t+lag} - m) / sum_t (x_t - m)^2``.  A 2-D input
    is treated as independent series in its rows.
    """
    x = np.asarray(series, dtype=float)
    lag = check_count(lag, "lag", minimum=0)
    n = x.shape[-1]
    if lag >= n:
        raise DomainError(f"lag {lag} must be smaller than the series length {n}")
    d = x - x.mean(axis=-1, keepdims=True)
    num = (d[..., : n - lag] * d[..., lag:]).sum(axis=-1)
    den = (d * d).sum(axis=-1)
    return num / den


def acf_null_band(p, n, lags=(1, 2), quantile=0.9, sims=5000, seed=None, chunk=1000):
    """Upper ``quantile`` points of the sample ACF under the fitted process.

    Returns an array aligned with ``lags``.
    """
    n = check_count(n, "n", minimum=4)
    sims = check_count(sims, "sims", minimum=1000)
    lags = [check_count(k, "lag") for k in lags]
    if any(4 * k >= n for k in lags):
        raise DomainError("each lag must be below n/4")
    rng = np.random.default_rng(seed)
    values = np.empty((sims, len(lags)))
    done = 0
    while done < sims:
        m = min(chunk, sims - done)
        paths = simulate_paths(m, n, p, rng)
        for j, k in enumerate(lags):
            values[done:done + m, j] = acf(paths, k)
        done += m
    return np.quantile(values, quantile, axis=0)


@dataclass
class GofReport:
    odd_fit: GEParams
    even_fit: GEParams
    ks_odd: KSResult
    ks_even: KSResult
    runs_odd: RunsResult
    runs_even: RunsResult
    lags: tuple
    acf: np.ndarray
    acf_band: np.ndarray
    band_quantile: float
    band_sims: int
    level: float = 0.05
    caveats: list = field(default_factory=list)

    @property
    def verdicts(self):
        return {
            "ks_odd_reject": self.ks_odd.pvalue < self.level,
            "ks_even_reject": self.ks_even.pvalue < self.level,
            "runs_odd_reject": self.runs_odd.pvalue < self.level,
            "runs_even_reject": self.runs_even.pvalue < self.level,
            "acf_above_band": [bool(a > b) for a, b in zip(self.acf, self.acf_band)],
        }

    def to_dict(self):
        return {
            "odd": {
                "shape": self.odd_fit.shape,
                "scale": self.odd_fit.scale,
                "ks_distance": self.ks_odd.distance,
                "ks_pvalue": self.ks_odd.pvalue,
                "ks_small_sample_correction": self.ks_odd.small_sample_correction,
                "runs_pvalue": self.runs_odd.pvalue,
            },
            "even": {
                "shape": self.even_fit.shape,
                "scale": self.even_fit.scale,
                "ks_distance": self.ks_even.distance,
                "ks_pvalue": self.ks_even.pvalue,
                "ks_small_sample_correction": self.ks_even.small_sample_correction,
                "runs_pvalue": self.runs_even.pvalue,
            },
            "lags": list(self.lags),
            "acf": [float(a) for a in self.acf],
            "acf_band": [float(b) for b in self.acf_band],
            "band_quantile": self.band_quantile,
            "band_sims": self.band_sims,
            "level": self.level,
            "verdicts": self.verdicts,
            "caveats": list(self.caveats),
        }


def run_gof(series, params, lags=(1, 2), quantile=0.9, sims=5000, seed=None, level=0.05):
    """Run the full check on ``series`` with null bands from ``params``.

    Parameters
    ----------
    series : array-like or Series
        Positive observations, at least 20 (each half feeds a runs test).
    params : ProcessParams
        Fitted process used to simulate the ACF bands.
    """
    x = check_series(series, min_length=20, positive=True)
    if not isinstance(params, ProcessParams):
        raise DomainError("params must be ProcessParams")
    odd, even = split_subsequences(x)
    fit_odd = ge_fit_iid(odd.values)
    fit_even = ge_fit_iid(even.values)
    caveats = ["KS p-values ignore estimation of the GE parameters on the same data"]
    for name, f in (("odd", fit_odd), ("even", fit_even)):
        if f.at_boundary:
            caveats.append(f"{name} subsequence GE fit hit the scale bracket edge")
    return GofReport(
        odd_fit=fit_odd.params,
        even_fit=fit_even.params,
        ks_odd=ks_test_ge(odd.values, fit_odd.params, params_estimated=True),
        ks_even=ks_test_ge(even.values, fit_even.params, params_estimated=True),
        runs_odd=runs_test(odd.values),
        runs_even=runs_test(even.values),
        lags=tuple(lags),
        acf=np.array([acf(x, k) for k in lags]),
        acf_band=acf_null_band(params, x.size, lags, quantile, sims, seed),
        band_quantile=quantile,
        band_sims=sims,
        level=level,
        caveats=caveats,
    )
