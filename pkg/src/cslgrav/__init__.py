"""cslgrav: a numerical laboratory for gravitationally motivated collapse models.

Continuous stochastic collapse dynamics on discretised quantum systems, with
the noise strength tied to gravity through Monte-Carlo models of mass-carrying
vacuum fluctuations, closed-form parameter solutions, and an order-of-magnitude
check of whether any semiclassical-gravity probe could detect the collapse.
"""

from .constants import CGS, NATURAL, PhysicalConstants
from .params import CollapseModel, KernelKind
from .quantities import DimensionError, Quantity, quantity

__version__ = "0.1.0"

__all__ = [
    "CGS",
    "NATURAL",
    "PhysicalConstants",
    "CollapseModel",
    "KernelKind",
    "DimensionError",
    "Quantity",
    "quantity",
    "__version__",
]
