"""Chain likelihood and maximum-likelihood fitting of the GE process.

The likelihood of an observed path is the Markov-chain product of pair
densities divided by the interior marginals.  In both shape regimes the
(common or second) shape enters as ``K log a + a * H`` and is profiled out in
closed form, leaving a one-dimensional search over the scale (equal shapes)
or a two-dimensional search over ``(gamma, lam)`` (unequal shapes).

``K = n1 + n2 + 1`` in both cases: every off-curve pair contributes two
powers of the shape, every on-curve pair one, and each of the ``n - 2``
interior marginals removes one.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._math import log1mexp
from ._optim import grid_then_golden
from ._validation import (
    ConvergenceError,
    DomainError,
    check_count,
    check_positive,
    check_series,
    spawn_seeds,
)
from .gedist import ge_log_pdf
from .process import (
    DEFAULT_TIE_TOL,
    ProcessParams,
    log_pair_density,
    simulate,
)

__all__ = [
    "TieSets",
    "FitReport",
    "tie_sets",
    "chain_loglik",
    "profile_alpha_case1",
    "profile_loglik_case1",
    "fit_case1",
    "profile_alpha1_case2",
    "profile_loglik_case2",
    "fit_case2",
    "bootstrap_ci",
]

EQUAL = "equal-shapes"
UNEQUAL = "unequal-shapes"
_LN2 = np.log(2.0)


@dataclass
class TieSets:
    """Indices ``i`` (0-based, pair ``(x_i, x_{i+1})``) by pair region."""

    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray

    @property
    def n0(self):
        return self.A0.size

    @property
    def n1(self):
        return self.A1.size

    @property
    def n2(self):
        return self.A2.size


def _region_codes_gamma(li, lj, gamma, tol):
    # alpha0*li vs alpha1*lj, divided through by alpha1
    a = gamma * li
    b = lj
    with np.errstate(invalid="ignore"):
        on_curve = (np.abs(a - b) <= tol * np.maximum(np.abs(a), np.abs(b))) | (a == b)
    return np.where(on_curve, 0, np.where(a < b, 1, 2))


def tie_sets(data, gamma=1.0, lam=1.0, tol=DEFAULT_TIE_TOL):
    """Split consecutive pairs into on-curve (A0), ``S1`` (A1) and ``S2``
    (A2) index sets for the curve of ratio ``gamma`` at scale ``lam``."""
    x = check_series(data, min_length=2, positive=True)
    la = log1mexp(lam * x)
    codes = _region_codes_gamma(la[:-1], la[1:], gamma, tol)
    return TieSets(*(np.flatnonzero(codes == c) for c in (0, 1, 2)))


def chain_loglik(data, p, tol=DEFAULT_TIE_TOL):
    """Log-likelihood of a path under the chain factorisation.

    ``sum_i log f(x_i, x_{i+1}) - sum_{i=2}^{n-1} log f(x_i)`` with pair
    densities from :func:`~stationary_ge.process.log_pair_density` (on-curve
    pairs use the singular branch) and GE marginals.
    """
    x = check_series(data, min_length=2, positive=True)
    pair, _ = log_pair_density(x[:-1], x[1:], p, tol)
    margin = ge_log_pdf(x[1:-1], p.marginal)
    return float(pair.sum() - margin.sum())


# ---------------------------------------------------------------------------
# case I: alpha0 == alpha1


def _case1_terms(lams, x, tol):
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    la = log1mexp(np.multiply.outer(lams, x))
    li, lj = la[:, :-1], la[:, 1:]
    codes = _region_codes_gamma(li, lj, 1.0, tol)
    m0, m1, m2 = (codes == 0), (codes == 1), (codes == 2)
    off = m1 | m2
    interior = la[:, 1:-1].sum(axis=1)
    xi, xj = x[:-1], x[1:]
    n0 = m0.sum(axis=1)
    n1 = m1.sum(axis=1)
    n2 = m2.sum(axis=1)
    g1 = (
        (m1 * (2.0 * li + lj)).sum(axis=1)
        + (m2 * (li + 2.0 * lj)).sum(axis=1)
        + 3.0 * (m0 * li).sum(axis=1)
        - 2.0 * interior
    )
    g2 = (off * (xi + xj)).sum(axis=1) + (m0 * xi).sum(axis=1) - x[1:-1].sum()
    g3 = -(off * (li + lj)).sum(axis=1) - (m0 * li).sum(axis=1) + interior
    K = n1 + n2 + 1
    c = (1 - n0) * _LN2
    return K, g1, g2, g3, c


def profile_alpha_case1(lam, data, tol=DEFAULT_TIE_TOL):
    """Closed-form MLE of the common shape for fixed scale ``lam``.

    ``alpha(lam) = -(n1 + n2 + 1) / g1`` where, with
    ``A_i = log(1 - exp(-lam x_i))``,
    ``g1 = sum_{A1}(2A_i + A_{i+1}) + sum_{A2}(A_i + 2A_{i+1})
    + 3 sum_{A0} A_i - 2 sum_{i=2}^{n-1} A_i``.
    """
    lam = check_positive(lam, "lam")
    x = check_series(data, min_length=2, positive=True)
    if np.ptp(x) == 0:
        raise DomainError("all observations are identical; no interior MLE")
    K, g1, *_ = _case1_terms(lam, x, tol)
    if not g1[0] < 0:
        raise DomainError("g1 is not negative; the shape MLE does not exist")
    return float(-K[0] / g1[0])


def profile_loglik_case1(lams, data, tol=DEFAULT_TIE_TOL):
    """Profile log-likelihood ``h(lam)`` (vectorised over ``lams``).

    ``h = c + K log(alpha(lam)) - K + K log(lam) - lam g2 + g3`` with
    ``c = (1 - n0) log 2``; this is the full chain log-likelihood, not
    a version shifted by a constant.
    """
    x = np.asarray(data, dtype=float)
    lams = np.asarray(lams, dtype=float)
    K, g1, g2, g3, c = _case1_terms(lams, x, tol)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = c + K * np.log(-K / g1) - K + K * np.log(np.atleast_1d(lams)) - np.atleast_1d(lams) * g2 + g3
    out = np.where(np.isfinite(out), out, -np.inf)
    return out.reshape(lams.shape) if lams.ndim else float(out[0])


@dataclass
class FitReport:
    """Estimates, attained log-likelihood, optimiser trace and (optionally)
    percentile bootstrap intervals."""

    model: str
    estimates: ProcessParams
    loglik: float
    n: int
    trace: dict = field(default_factory=dict)
    ci: dict = field(default_factory=dict)
    B: int = 0
    level: float = None
    seed: int = None
    bootstrap_failures: int = 0
    profile: dict = field(default_factory=dict, repr=False)
    tol: float = DEFAULT_TIE_TOL

    def to_dict(self):
        e = self.estimates
        return {
            "model": self.model,
            "alpha0": e.alpha0,
            "alpha1": e.alpha1,
            "lambda": e.lam,
            "loglik": self.loglik,
            "ci": {k: [float(v[0]), float(v[1])] for k, v in self.ci.items()},
            "B": self.B,
            "level": self.level,
            "seed": self.seed,
            "n": self.n,
            "ci_method": "percentile",
            "bootstrap_failures": self.bootstrap_failures,
            "trace": _jsonable({k: v for k, v in self.trace.items() if k != "bootstrap"}),
        }


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif isinstance(v, (np.floating, np.integer, np.bool_)):
            v = v.item()
        elif isinstance(v, tuple):
            v = [float(t) for t in v]
        out[k] = v
    return out


def _default_lam_bracket(x):
    m = x.mean()
    return 0.01 / m, 100.0 / m


def fit_case1(data, bracket=None, tol=DEFAULT_TIE_TOL, grid_num=64, rtol=1e-9):
    """Fit the equal-shape model by maximising the scale profile.

    A ``grid_num``-point log grid over ``bracket`` locates the maximum, then
    golden-section search refines it.  A maximum on the edge of the bracket
    widens it once by a factor 100 on that side before giving up.

    Raises
    ------
    ConvergenceError
        If the maximum still sits on the bracket edge after widening.
    """
    x = check_series(data, min_length=3, positive=True)
    if np.ptp(x) == 0:
        raise DomainError("all observations are identical; no interior MLE")
    lo, hi = bracket if bracket is not None else _default_lam_bracket(x)
    widened = False
    while True:
        res = grid_then_golden(
            lambda lam: profile_loglik_case1(lam, x, tol),
            lo,
            hi,
            num=grid_num,
            rtol=rtol,
            f_grid=lambda g: profile_loglik_case1(g, x, tol),
        )
        if not res.at_boundary:
            break
        if widened:
            raise ConvergenceError(
                "profile maximum on the bracket edge after widening",
                best={"lambda": res.x, "loglik": res.fx},
            )
        grid, values = res.grid
        if int(np.argmax(values)) == 0:
            lo = lo / 100.0
        else:
            hi = hi * 100.0
        widened = True
    lam = res.x
    alpha = profile_alpha_case1(lam, x, tol)
    grid, values = res.grid
    return FitReport(
        model=EQUAL,
        estimates=ProcessParams(alpha, alpha, lam),
        loglik=float(res.fx),
        n=x.size,
        trace={
            "nfev": res.nfev,
            "bracket": res.bracket,
            "search_interval": (float(lo), float(hi)),
            "widened": widened,
        },
        profile={"lambda": grid, "loglik": values},
        tol=tol,
    )


# ---------------------------------------------------------------------------
# case II: alpha0 = gamma * alpha1


def _case2_terms(gammas, lams, x, tol):
    gammas, lams = np.broadcast_arrays(
        np.asarray(gammas, dtype=float), np.asarray(lams, dtype=float)
    )
    shape = gammas.shape
    g = gammas.reshape(-1, 1)
    la = log1mexp(lams.reshape(-1, 1) * x)
    li, lj = la[:, :-1], la[:, 1:]
    codes = _region_codes_gamma(g * li, lj, 1.0, tol)
    m0, m1, m2 = (codes == 0), (codes == 1), (codes == 2)
    off = m1 | m2
    n = x.size
    n0 = m0.sum(axis=1)
    n1 = m1.sum(axis=1)
    n2 = m2.sum(axis=1)
    gg = g[:, 0]
    interior = la[:, 1:-1].sum(axis=1)
    h1 = (
        (m1 * ((1.0 + g) * li + g * lj)).sum(axis=1)
        + (m2 * (li + (1.0 + g) * lj)).sum(axis=1)
        + (1.0 + gg + gg * gg) * (m0 * li).sum(axis=1)
        - (1.0 + gg) * interior
    )
    g2 = (off * (x[:-1] + x[1:])).sum(axis=1) - x[1:-1].sum()
    with np.errstate(invalid="ignore"):
        sing = np.where(m0, log1mexp(-g * li) - g * li, 0.0).sum(axis=1)
    rest = (
        (n1 + n2 - (n - 2)) * np.log1p(gg)
        + n1 * np.log(gg)
        + sing
        - (off * (li + lj)).sum(axis=1)
        + interior
    )
    K = n1 + n2 + 1
    return shape, lams.reshape(-1), K, h1, g2, rest, (n0, n1, n2)


def profile_alpha1_case2(gamma, lam, data, tol=DEFAULT_TIE_TOL):
    """Closed-form MLE of ``alpha1`` for fixed ``gamma = alpha0/alpha1`` and
    scale.

    ``alpha1(gamma, lam) = -(n1 + n2 + 1) / h1`` with
    ``h1 = (1+g) sum_{A1} A_i + g sum_{A1} A_{i+1} + sum_{A2} A_i
    + (1+g) sum_{A2} A_{i+1} + (1+g+g^2) sum_{A0} A_i
    - (1+g) sum_{i=2}^{n-1} A_i``.
    """
    gamma = check_positive(gamma, "gamma")
    lam = check_positive(lam, "lam")
    x = check_series(data, min_length=2, positive=True)
    _, _, K, h1, *_ = _case2_terms(gamma, lam, x, tol)
    if not h1[0] < 0:
        raise DomainError("h1 is not negative; the alpha1 MLE does not exist")
    return float(-K[0] / h1[0])


def profile_loglik_case2(gammas, lams, data, tol=DEFAULT_TIE_TOL):
    """Log-likelihood maximised over ``alpha1`` at each ``(gamma, lam)``;
    broadcasts its first two arguments."""
    x = np.asarray(data, dtype=float)
    shape, lam_flat, K, h1, g2, rest, _ = _case2_terms(gammas, lams, x, tol)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = K * np.log(-K / h1) - K + K * np.log(lam_flat) - lam_flat * g2 + rest
    out = np.where(np.isfinite(out), out, -np.inf)
    return out.reshape(shape) if shape else float(out[0])


def _nelder_mead_restarts(obj, start, step, max_evals, xatol=1e-9, fatol=1e-11, restarts=4):
    """Nelder-Mead with simplex re-initialisation around the incumbent.

    The objective is only piecewise smooth, so a collapsed simplex is
    rebuilt (at a shrinking size) until a restart yields no improvement.
    """
    best_x = np.asarray(start, dtype=float)
    best_f = obj(best_x)
    nfev = 1
    simplexes = []
    for r in range(restarts + 1):
        h = step / (4.0**r)
        init = np.array([best_x, best_x + [h, 0.0], best_x + [0.0, h]])
        res = optimize.minimize(
            obj,
            best_x,
            method="Nelder-Mead",
            options={
                "initial_simplex": init,
                "xatol": xatol,
                "fatol": fatol,
                "maxfev": max(max_evals - nfev, 10),
            },
        )
        nfev += res.nfev
        simplexes.append(res.final_simplex[0].tolist())
        improved = res.fun < best_f - fatol
        if res.fun <= best_f:
            best_x, best_f = res.x, res.fun
        if nfev >= max_evals:
            return best_x, best_f, nfev, simplexes, False
        if not improved and r > 0:
            break
    return best_x, best_f, nfev, simplexes, True


def fit_case2(
    data,
    init=None,
    tol=DEFAULT_TIE_TOL,
    gamma_range=(1 / 20, 20),
    n_gamma=64,
    lam_range=None,
    lam_per_decade=64,
    max_evals=4000,
    fix_gamma=None,
    include_case1=True,
):
    """Fit the unequal-shape model.

    Without ``init`` a log grid over ``gamma_range`` x ``lam_range`` is
    evaluated (returned as the contour table) and its best cell starts a
    Nelder-Mead search in ``(log gamma, log lam)`` confined to that box.
    With ``include_case1`` the equal-shape optimum competes as a candidate,
    so the attained log-likelihood is never below the nested model's.

    The objective jumps wherever a pair crosses the singular curve, and
    pairs that truly lie on the curve only register as such at one exact
    ``(gamma, lam)``.  On data from unequal shapes the maximum therefore
    often sits on the edge of the ``gamma`` range (the near-i.i.d. limit);
    ``trace['at_boundary']`` reports this.

    ``fix_gamma`` pins ``gamma`` and reduces the search to the scale.

    Raises
    ------
    ConvergenceError
        If the simplex search uses ``max_evals`` objective evaluations
        without converging; ``best`` carries the incumbent.
    """
    x = check_series(data, min_length=4, positive=True)
    if np.ptp(x) == 0:
        raise DomainError("all observations are identical; no interior MLE")
    if lam_range is None:
        lam_range = _default_lam_bracket(x)

    if fix_gamma is not None:
        g = check_positive(fix_gamma, "fix_gamma")
        res = grid_then_golden(
            lambda lam: profile_loglik_case2(g, lam, x, tol),
            lam_range[0],
            lam_range[1],
            num=64,
            f_grid=lambda grid: profile_loglik_case2(g, grid, x, tol),
        )
        return _case2_report(x, g, res.x, res.fx, tol, {"nfev": res.nfev, "fixed_gamma": g}, {})

    lo_box = np.log([gamma_range[0], lam_range[0]])
    hi_box = np.log([gamma_range[1], lam_range[1]])

    def obj(z):
        if np.any(z < lo_box) or np.any(z > hi_box):
            return np.inf
        v = profile_loglik_case2(np.exp(z[0]), np.exp(z[1]), x, tol)
        return -v if np.isfinite(v) else np.inf

    profile = {}
    nfev = 0
    candidates = []
    if init is None:
        gammas = np.geomspace(*gamma_range, n_gamma)
        decades = np.log10(lam_range[1] / lam_range[0])
        lams = np.geomspace(*lam_range, max(int(round(lam_per_decade * decades)), 2))
        grid = profile_loglik_case2(gammas[:, None], lams[None, :], x, tol)
        nfev += grid.size
        i, j = np.unravel_index(np.argmax(grid), grid.shape)
        start = np.log([gammas[i], lams[j]])
        step = max(np.log(gammas[1] / gammas[0]), np.log(lams[1] / lams[0]))
        profile = {"gamma": gammas, "lambda": lams, "loglik": grid}
    else:
        start = np.clip(
            np.log([check_positive(init[0], "gamma"), check_positive(init[1], "lambda")]),
            lo_box,
            hi_box,
        )
        step = 0.05
    step = min(step, 0.5 * float(np.min(hi_box - lo_box)))
    # keep the initial simplex inside the box
    start = np.minimum(start, hi_box - step)

    if include_case1:
        try:
            f1 = fit_case1(x, tol=tol)
        except (DomainError, ConvergenceError):
            pass
        else:
            nfev += f1.trace["nfev"]
            candidates.append(np.array([0.0, np.log(f1.estimates.lam)]))

    zx, zf, used, simplexes, converged = _nelder_mead_restarts(obj, start, step, max_evals)
    nfev += used
    for cz in candidates:
        # re-evaluated with the case-II objective so the comparison is like for like
        cf = obj(cz)
        nfev += 1
        if cf <= zf:
            zx, zf = cz, cf
    if not np.isfinite(zf):
        raise ConvergenceError("no finite log-likelihood found")
    if not converged:
        raise ConvergenceError(
            "maximum number of evaluations reached",
            best={"gamma": float(np.exp(zx[0])), "lambda": float(np.exp(zx[1])), "loglik": -zf},
        )
    edge = 1e-3
    at_boundary = bool(np.any(zx - lo_box < edge) or np.any(hi_box - zx < edge))
    trace = {
        "nfev": nfev,
        "start": np.exp(start),
        "final_simplex": simplexes[-1],
        "search_box": (*np.exp(lo_box), *np.exp(hi_box)),
        "at_boundary": at_boundary,
    }
    return _case2_report(x, float(np.exp(zx[0])), float(np.exp(zx[1])), -zf, tol, trace, profile)


def _case2_report(x, gamma, lam, loglik, tol, trace, profile):
    a1 = profile_alpha1_case2(gamma, lam, x, tol)
    return FitReport(
        model=UNEQUAL,
        estimates=ProcessParams(gamma * a1, a1, lam),
        loglik=float(loglik),
        n=x.size,
        trace=trace,
        profile=profile,
        tol=tol,
    )


# ---------------------------------------------------------------------------
# bootstrap


def _refit(model, data, fit, tol):
    if model == EQUAL:
        return fit_case1(data, tol=tol)
    e = fit.estimates
    return fit_case2(data, init=(e.gamma, e.lam), tol=tol, include_case1=False)


def bootstrap_ci(data, fit, B=1000, level=0.95, seed=None, max_failure_rate=0.10):
    """Parametric bootstrap percentile intervals.

    Simulates ``B`` paths of the observed length from ``fit.estimates``
    (replicate ``i`` uses child stream ``i`` of ``seed``), refits each with
    the same model and takes the ``(1 -/+ level)/2`` quantiles.  Failed
    refits are excluded and counted.

    Returns
    -------
    FitReport
        A copy of ``fit`` with ``ci``, ``B``, ``level``, ``seed`` and
        ``bootstrap_failures`` filled in; ``trace['bootstrap']`` holds the
        replicate estimates.
    """
    x = check_series(data, min_length=4, positive=True)
    B = check_count(B, "B", minimum=100)
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    seeds = spawn_seeds(seed, B)
    est = np.full((B, 3), np.nan)
    failures = 0
    for b, ss in enumerate(seeds):
        path = simulate(x.size, fit.estimates, seed=ss).values
        try:
            r = _refit(fit.model, path, fit, fit.tol)
        except (DomainError, ConvergenceError, ValueError):
            failures += 1
            continue
        e = r.estimates
        est[b] = (e.alpha0, e.alpha1, e.lam)
    if failures > max_failure_rate * B:
        raise ConvergenceError(f"{failures} of {B} bootstrap refits failed")
    ok = est[~np.isnan(est[:, 0])]
    q = [(1 - level) / 2, (1 + level) / 2]
    lo_hi = np.quantile(ok, q, axis=0)
    names = ["alpha0", "alpha1", "lambda"]
    ci = {name: (lo_hi[0, k], lo_hi[1, k]) for k, name in enumerate(names)}
    if fit.model == EQUAL:
        ci = {"alpha": ci["alpha0"], "lambda": ci["lambda"]}
    else:
        g = ok[:, 0] / ok[:, 1]
        ci["gamma"] = tuple(np.quantile(g, q))
    trace = dict(fit.trace)
    trace["bootstrap"] = ok
    return FitReport(
        model=fit.model,
        estimates=fit.estimates,
        loglik=fit.loglik,
        n=fit.n,
        trace=trace,
        ci=ci,
        B=B,
        level=level,
        seed=seed if seed is None or isinstance(seed, int) else None,
        bootstrap_failures=failures,
        profile=fit.profile,
        tol=fit.tol,
    )
