"""Numerically exact work statistics of driven open quantum systems.

The characteristic function of two-measurement work is propagated along
a generalised-time contour (equilibration + counting + drive) through a
compressed influence-functional tensor network, then inverted into the
work distribution and its moments.
"""

from .contour import BranchStep, GeneralizedTimeGrid, assign_branches, step_propagator
from .model import (
    BathCorrelation,
    DrivingProtocol,
    InfluenceCoefficients,
    QuadratureError,
    SpectralDensity,
)
from .pt_engine import (
    CompressionConfig,
    ProcessTensor,
    build_process_tensor,
    contract,
    load_process_tensor,
    save_process_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "BathCorrelation",
    "BranchStep",
    "CompressionConfig",
    "DrivingProtocol",
    "GeneralizedTimeGrid",
    "InfluenceCoefficients",
    "ProcessTensor",
    "QuadratureError",
    "SpectralDensity",
    "assign_branches",
    "build_process_tensor",
    "contract",
    "load_process_tensor",
    "save_process_tensor",
    "step_propagator",
    "__version__",
]
