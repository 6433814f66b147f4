"""
Exception hierarchy for the lambda-flows library

Every error raised on purpose by the library derives from LambdaFlowsError and,
where a builtin fits, from that builtin too, so ``except ValueError`` keeps
working for callers that do not know this module.
"""

from typing import Any, Dict, Optional


class LambdaFlowsError(Exception):
    """Base class for all library errors"""


class PartitionError(LambdaFlowsError, ValueError):
    """Invalid partition input or structurally impossible partition operation"""


class MeasureError(LambdaFlowsError, ValueError):
    """Invalid measure parameters"""


class DomainError(LambdaFlowsError, ValueError):
    """Operation used outside the regime it is defined for"""


class ReconstructionError(LambdaFlowsError, ValueError):
    """A before/after pair is not a single reproduction event"""


class ConfigError(LambdaFlowsError, ValueError):
    """Invalid run configuration"""


class SimulationError(LambdaFlowsError, RuntimeError):
    """Simulation could not honour its contract (step cap, horizon misuse)"""


class NumericalError(LambdaFlowsError, RuntimeError):
    """Quadrature or root finding failed to converge"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UndecidedError(LambdaFlowsError):
    """Divergence detection was inconclusive; carries the partial report"""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report
