"""Physical-constraints-preserving central DG solver for special relativistic hydrodynamics."""

from .eos import EosModel
from .state import DEFAULT_EPS, conserved_to_primitive, primitive_to_conserved

__version__ = "0.1.0"
__all__ = ["EosModel", "DEFAULT_EPS", "conserved_to_primitive", "primitive_to_conserved", "__version__"]
