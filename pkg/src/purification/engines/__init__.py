"""
Engines module - iterating and sampling components.

ARCHITECTURE NOTE:
- Engines turn a validated request into a report.
- Engines call tools for tensors and label algebra; tools never call engines.
- Engines are NOT the orchestrator - they are called BY the orchestrator.

Available engines:
- DynamicsEngine: Fixed points, thresholds, working ranges and yields of
  bipartite purification maps
- GraphMCEngine: Monte Carlo purification of two-colorable graph states
"""

from purification.engines.base import (
    BaseEngine,
    EngineError,
    NeverSucceedsError,
    StatisticsExhaustedError,
    UnreachableTargetError,
)
from purification.engines.dynamics import DynamicsEngine
from purification.engines.graphmc import GraphMCEngine

__all__ = [
    "BaseEngine",
    "EngineError",
    "NeverSucceedsError",
    "StatisticsExhaustedError",
    "UnreachableTargetError",
    "DynamicsEngine",
    "GraphMCEngine",
]
