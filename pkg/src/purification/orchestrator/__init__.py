"""
Orchestrator module - command pipeline for the analyses.

ARCHITECTURE NOTE:
The orchestrator is a RUNTIME COORDINATOR, not a numerical component.
It does no numerics itself - it simply:
1. Merges flags and config files into a validated RunConfig
2. Resolves noise tables, maps and graphs
3. Calls one engine per command
4. Writes the CSV/JSON artifact and returns a RunResult

Flow:
    flags + config file
        │
        ▼
    parse_config → RunConfig
        │
        ▼
    DynamicsEngine / GraphMCEngine
        │
        ▼
    RunResult (+ artifact file)
"""

from purification.orchestrator.pipeline import (
    AnalysisPipeline,
    ConfigError,
    ErrorKind,
    RunResult,
    parse_config,
    run_command,
)

__all__ = [
    "AnalysisPipeline",
    "ConfigError",
    "ErrorKind",
    "RunResult",
    "parse_config",
    "run_command",
]
