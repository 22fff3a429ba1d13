"""
Base engine class for the iterating and sampling engines.

Engines hold the numerical settings (tolerances, iteration caps, sample
counts) and turn a validated request into a report.
"""

from abc import ABC, abstractmethod
from typing import Generic, Optional, TypeVar

from purification.config import Settings, get_settings

# Type variables for request and report types
RequestT = TypeVar("RequestT")
ReportT = TypeVar("ReportT")


class BaseEngine(ABC, Generic[RequestT, ReportT]):
    """
    Abstract base class for all engines.

    Engines are deterministic components that:
    - Iterate purification maps or sample Monte Carlo rounds
    - Call the tools in ``purification.tools`` for tensors and algebra
    - Transform a request into a pydantic report

    Subclasses must implement:
    - run(): Main analysis for the engine's primary request type

    Attributes:
        name: Human-readable engine name
        settings: Numerical settings shared by all engines

    Example:
        >>> class MyEngine(BaseEngine[PurificationMap, FixedPointReport]):
        ...     def run(self, request: PurificationMap) -> FixedPointReport:
        ...         ...
    """

    name: str = "BaseEngine"

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    @abstractmethod
    def run(self, request: RequestT) -> ReportT:
        """
        Execute the engine's main analysis.

        Raises:
            EngineError: If the computation cannot produce a report
        """


class EngineError(Exception):
    """Exception raised when an engine computation fails."""

    def __init__(self, engine_name: str, message: str):
        self.engine_name = engine_name
        self.message = message
        super().__init__(f"[{engine_name}] {message}")


class NeverSucceedsError(EngineError):
    """Post-selection discards every outcome for this input."""

    def __init__(self, engine_name: str):
        super().__init__(engine_name, "protocol never succeeds on this input")


class UnreachableTargetError(EngineError):
    """The trajectory from the channel never reaches the target fidelity."""

    def __init__(self, engine_name: str, target: float, reached: float):
        self.target = target
        self.reached = reached
        super().__init__(
            engine_name,
            f"target fidelity unreachable: target {target:g}, trajectory stops at {reached:.6f}",
        )


class StatisticsExhaustedError(EngineError):
    """Every Monte Carlo sample was rejected in some round."""

    def __init__(self, engine_name: str, round_index: int):
        self.round = round_index
        super().__init__(engine_name, f"statistics exhausted at round {round_index}")
