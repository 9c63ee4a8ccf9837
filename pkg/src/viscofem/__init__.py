"""Space-time cG(1)cG(1) finite elements for viscoelastic integro-differential
wave problems with dual weighted residual error control."""

from .assembly import ElasticParams
from .kernel import KernelSpec, validate_kernel
from .timegrid import TimePartition

__all__ = ["ElasticParams", "KernelSpec", "TimePartition", "validate_kernel"]
__version__ = "0.1.0"
