"""Input validation helpers.

These mirror the small ``check_*`` utilities that scikit-learn uses at public
entry points: coerce, validate, and fail early with a ``ValueError`` that
names the offending argument.
"""

import numbers

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ConvergenceError(RuntimeError):
    """Raised when an optimizer cannot produce an interior maximum.

    Attributes
    ----------
    best : dict or None
        Best point seen before giving up, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a finite positive real, got {value!r}")
    return float(value)


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_series(x, name="data", min_length=1, positive=False):
    """Validate a one-dimensional series of finite reals.

    Accepts array-likes of shape ``(n,)`` or ``(n, 1)``, the latter being the
    scikit-learn ``X`` convention for a single feature.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise DomainError(f"{name} needs at least {min_length} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    if positive and np.any(arr <= 0):
        bad = int(np.flatnonzero(arr <= 0)[0])
        raise DomainError(f"{name} must be strictly positive; index {bad} is {arr[bad]!r}")
    return arr


def check_rng(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    ``seed`` may be ``None``, an int, a ``SeedSequence`` or an existing
    ``Generator`` (returned unchanged).
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise DomainError(f"cannot build a random generator from {seed!r}")


def spawn_seeds(seed, n):
    """Split ``seed`` into ``n`` independent child streams.

    Stream-split rule: ``SeedSequence(seed).spawn(n)``; child ``i`` is always
    the same for a given ``(seed, i)`` regardless of how many are consumed.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    elif isinstance(seed, np.random.Generator):
        ss = np.random.SeedSequence(int(seed.integers(2**63)))
    else:
        ss = np.random.SeedSequence(seed)
    return ss.spawn(n)
