"""Bang-bang decoupling of encoded spin qubits with nonsynchronous pulse clocks.

Subpackages by layer: :mod:`~bbdfs.pauli` (symbolic Pauli algebra),
:mod:`~bbdfs.model` (register, exchange and bath Hamiltonians),
:mod:`~bbdfs.pulses` (clocks and schedules), :mod:`~bbdfs.averaging`
(first-order average Hamiltonians), :mod:`~bbdfs.evolution` (exact pulsed
dynamics) and :mod:`~bbdfs.dfs` (codes and encoded gates).
"""

from .errors import (AmbiguousFrameError, BBDFSError, CapacityError, ConfigError,
                     DegenerateCouplingError, InvalidOperandError, LayoutError,
                     NonHermitianError, ScheduleError, UnsupportedConfigurationError)
from .kernels import BACKEND
from .pauli import PauliString, PauliSum, conjugate, dense, format_sum, mul, parse_sum

__version__ = "0.1.0"

__all__ = [
    "AmbiguousFrameError", "BACKEND", "BBDFSError", "CapacityError", "ConfigError",
    "DegenerateCouplingError", "InvalidOperandError", "LayoutError", "NonHermitianError",
    "PauliString", "PauliSum", "ScheduleError", "UnsupportedConfigurationError",
    "conjugate", "dense", "format_sum", "mul", "parse_sum", "__version__",
]
