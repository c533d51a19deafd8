"""Stationary GE process: simulation, joint laws, fitting and model checks."""

from ._validation import ConvergenceError, DomainError
from .estimators import GEDistribution, GEProcess
from .gedist import *  # noqa: F401,F403
from .gedist import __all__ as _gedist_all
from .gof import *  # noqa: F401,F403
from .gof import __all__ as _gof_all
from .inference import *  # noqa: F401,F403
from .inference import __all__ as _inference_all
from .process import *  # noqa: F401,F403
from .process import DEFAULT_TIE_TOL
from .process import __all__ as _process_all

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "GEDistribution",
    "GEProcess",
    "DEFAULT_TIE_TOL",
    *_gedist_all,
    *_process_all,
    *_inference_all,
    *_gof_all,
]
