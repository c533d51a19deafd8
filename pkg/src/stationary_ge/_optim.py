"""One-dimensional maximisation used by the profile likelihoods."""

from dataclasses import dataclass, field

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass
class Maximum1D:
    x: float
    fx: float
    nfev: int
    bracket: tuple
    at_boundary: bool = False
    grid: tuple = field(default=None, repr=False)


def golden_section_max(f, lo, hi, rtol=1e-9, atol=0.0, maxiter=500):
    """Maximise a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Stops once ``hi - lo <= max(atol, rtol * max(|lo|, |hi|))``.
    """
    if not lo < hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    nfev = 2
    for _ in range(maxiter):
        if hi - lo <= max(atol, rtol * max(abs(lo), abs(hi))):
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
        nfev += 1
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return Maximum1D(x=float(x), fx=float(fx), nfev=nfev, bracket=(float(lo), float(hi)))


def grid_then_golden(f, lo, hi, num=64, rtol=1e-9, f_grid=None):
    """Scan ``num`` log-spaced points on ``[lo, hi]`` then refine by golden section.

    The refinement works on ``log x`` over the two grid cells that surround
    the best grid point.  ``f_grid`` may evaluate the whole grid in one call.
    A grid argmax on either end of the scan is reported as ``at_boundary``.
    """
    grid = np.geomspace(lo, hi, num)
    values = np.asarray(f_grid(grid) if f_grid is not None else [f(g) for g in grid], float)
    values = np.where(np.isfinite(values), values, -np.inf)
    if not np.any(np.isfinite(values)):
        raise ValueError("objective is not finite anywhere on the grid")
    k = int(np.argmax(values))
    at_boundary = k == 0 or k == num - 1
    a = np.log(grid[max(k - 1, 0)])
    b = np.log(grid[min(k + 1, num - 1)])
    # width in log x is relative width in x
    res = golden_section_max(lambda t: f(np.exp(t)), a, b, rtol=0.0, atol=rtol)
    x = float(np.exp(res.x))
    fx = res.fx
    if values[k] > fx:
        x, fx = float(grid[k]), float(values[k])
    return Maximum1D(
        x=x,
        fx=fx,
        nfev=res.nfev + num,
        bracket=(float(np.exp(res.bracket[0])), float(np.exp(res.bracket[1]))),
        at_boundary=at_boundary,
        grid=(grid, values),
    )
