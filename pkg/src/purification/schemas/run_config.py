"""
RunConfig - resolved configuration of one CLI command.

Flags and an optional JSON config file are merged into this model; the
orchestrator only ever sees a validated RunConfig. Unknown keys are
rejected so a typo in a config file never silently falls back to a
default.
"""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from purification.schemas.tensors import Scheme

NOISE_KINDS = ("uniform", "kay", "custom")
GRID_TOL = 1e-9


class Command(str, Enum):
    """Analyses exposed on the command line."""
    TENSOR = "tensor"
    FIXED_POINTS = "fixed-points"
    PURIFY_CURVE = "purify-curve"
    WORKING_RANGE = "working-range"
    YIELD = "yield"
    BOUNDS = "bounds"
    MC_GRAPH = "mc-graph"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class Backend(str, Enum):
    """Where bipartite transition tensors come from."""
    TENSOR = "tensor"   # label-space composition
    EXACT = "exact"     # density-matrix simulation


def parse_grid(spec: str) -> list[float]:
    """
    Parse ``start:stop:step`` into an inclusive list of values.

    The stop value is included when it lies on the grid within 1e-9.

    Raises:
        ValueError: If the spec is malformed or the step is not positive
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"Grid must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(part) for part in parts)
    except ValueError as e:
        raise ValueError(f"Grid has a non-numeric part: {spec!r}") from e
    if step <= 0.0:
        raise ValueError(f"Grid step must be positive, got {step}")
    if stop < start:
        raise ValueError(f"Grid stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + GRID_TOL)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def is_grid(value: Union[float, str, None]) -> bool:
    return isinstance(value, str) and value.count(":") == 2


def _as_scalar(name: str, value: Union[float, str]) -> float:
    try:
        return float(value)
    except ValueError as e:
        raise ValueError(f"--{name} expects a number here, got {value!r}") from e


class RunConfig(BaseModel):
    """
    Fully resolved command configuration.

    Attributes:
        command: Analysis to run
        scheme: Purification scheme
        noise: Noise spec ("uniform:0.02", "kay:0.01,0.01,0.01",
            "custom:<json table>") or a bare kind for scans
        pg: Gate error probability (scalar) or grid
        pm: Measurement error probability (scalar) or grid
        p: Diagonal noise grid (p_g = p_m = p) for fixed-points and mc-graph scans
        fch: Channel fidelity
        target: Target fidelity for yield
        targets: Target fidelity grid for yield curves
        f_grid: Input fidelity grid for purify-curve
        engine: Tensor backend for bipartite commands
        out: Output file path (default derived from command and format)
        format: csv or json
        seed: Master seed for Monte Carlo runs
        samples: Monte Carlo samples per round
        rounds: Purification rounds for mc-graph
        graph: Graph file for mc-graph
        local_vertices: Vertices not sent through the channel
        with_fmin: Also locate F_min in working-range scans
        workers: Monte Carlo worker threads
    """

    command: Command
    scheme: Scheme = Scheme.DOUBLE
    noise: str = Field(default="uniform", description="Noise spec")
    pg: Optional[Union[float, str]] = None
    pm: Optional[Union[float, str]] = None
    p: Optional[str] = Field(default=None, description="Diagonal noise grid start:stop:step")
    fch: Optional[float] = Field(
        default=None,
        ge=0.25,
        le=1.0,
        description=(
            "Channel fidelity. Purification needs F_ch > 1/4; the closed bound admits "
            "the fully mixed channel so scans can start at F_ch = 0.25"
        ),
    )
    target: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    targets: Optional[str] = Field(default=None, description="Target fidelity grid start:stop:step")
    f_grid: str = "0.25:1:0.01"
    engine: Backend = Backend.TENSOR
    out: Optional[Path] = None
    format: OutputFormat = OutputFormat.CSV
    seed: int = Field(default=0, ge=0, lt=2**64)
    samples: Optional[int] = Field(default=None, ge=1)
    rounds: int = Field(default=10, ge=0)
    graph: Optional[Path] = None
    local_vertices: list[int] = Field(default_factory=list)
    with_fmin: bool = False
    workers: Optional[int] = Field(default=None, ge=1)

    model_config = ConfigDict(extra="forbid", frozen=True)

    @model_validator(mode="after")
    def _check_command_fields(self) -> RunConfig:
        kind, _, params = self.noise.partition(":")
        if kind not in NOISE_KINDS:
            raise ValueError(f"Unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")
        parameterized = bool(params)

        if self.command is Command.WORKING_RANGE:
            if not (is_grid(self.pg) and is_grid(self.pm)):
                raise ValueError("working-range needs grids for --pg and --pm (start:stop:step)")
            if parameterized or kind == "custom":
                raise ValueError("working-range takes a bare noise kind (uniform or kay)")
            parse_grid(str(self.pg))
            parse_grid(str(self.pm))
            return self

        if self.p is not None:
            if self.command not in (Command.FIXED_POINTS, Command.MC_GRAPH):
                raise ValueError(f"--p does not apply to {self.command.value}")
            if parameterized or kind == "custom":
                raise ValueError("--p takes a bare noise kind (uniform or kay)")
            if self.pg is not None or self.pm is not None:
                raise ValueError("--p conflicts with --pg and --pm")
            if self.targets is not None:
                raise ValueError("--p conflicts with --targets")
            parse_grid(self.p)
            if self.command is Command.MC_GRAPH and self.fch is None:
                raise ValueError("mc-graph needs --fch")
            return self

        if self.targets is not None:
            if self.command not in (Command.YIELD, Command.MC_GRAPH):
                raise ValueError(f"--targets does not apply to {self.command.value}")
            if self.target is not None:
                raise ValueError("--target conflicts with --targets")
            parse_grid(self.targets)

        for name in ("pg", "pm"):
            value = getattr(self, name)
            if value is not None:
                if is_grid(value):
                    raise ValueError(f"--{name} must be a single value for {self.command.value}")
                _as_scalar(name, value)

        if self.pg is not None and parameterized:
            raise ValueError(f"--pg conflicts with the parameters in --noise {self.noise!r}")
        if self.pg is None and not parameterized:
            raise ValueError(f"--noise {kind} needs a parameter or --pg")

        wants_target = self.target is None and self.targets is None
        if self.command is Command.YIELD and (self.fch is None or wants_target):
            raise ValueError("yield needs --fch and --target or --targets")
        if self.command is Command.MC_GRAPH and self.fch is None:
            raise ValueError("mc-graph needs --fch")
        if self.command is Command.PURIFY_CURVE:
            parse_grid(self.f_grid)
        return self

    @property
    def noise_kind(self) -> str:
        return self.noise.partition(":")[0]

    @property
    def p_m(self) -> float:
        """Scalar measurement error (0 when not given)."""
        return 0.0 if self.pm is None else _as_scalar("pm", self.pm)

    def pg_grid(self) -> list[float]:
        return parse_grid(str(self.pg))

    def pm_grid(self) -> list[float]:
        return parse_grid(str(self.pm))

    def fin_grid(self) -> list[float]:
        return parse_grid(self.f_grid)

    def p_grid(self) -> list[float]:
        return parse_grid(str(self.p))

    def target_grid(self) -> list[float]:
        return parse_grid(str(self.targets))

    def default_output(self, output_dir: Path) -> Path:
        """Output path used when ``out`` is not given."""
        name = f"{self.command.value}_{self.scheme.value}.{self.format.value}"
        return output_dir / name
