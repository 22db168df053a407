# __init__.py
from .config import TOOL_VERSION as __version__
from .errors import (ConfigError, DomainError, InnerCLTError, InsufficientScaleError,
                     NumericalFailureError, PreconditionError)
from .inner_core import BlaschkeProduct, make_blaschke

__all__ = [
    "BlaschkeProduct",
    "ConfigError",
    "DomainError",
    "InnerCLTError",
    "InsufficientScaleError",
    "NumericalFailureError",
    "PreconditionError",
    "make_blaschke",
]
