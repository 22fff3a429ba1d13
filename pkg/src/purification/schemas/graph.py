"""
Graph-state schemas for multipartite purification.

A graph state on a two-colorable graph is stabilized by

    K_j = X_j prod_{k in V_j} Z_k

and a basis element is labelled by the eigenvalue exponents mu_j. Pauli
noise only flips labels, so a noisy graph state is a distribution over
label vectors, which is what the Monte Carlo engine samples.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from purification.schemas.noise import NoiseParams
from purification.schemas.tensors import Scheme


class GraphValidationError(ValueError):
    """Raised when a graph cannot host a two-colorable graph state."""

    def __init__(self, message: str, edge: Optional[tuple[int, int]] = None):
        self.edge = edge
        super().__init__(message)


class Color(str, Enum):
    """Partition of a vertex."""
    A = "A"
    B = "B"


class TwoColorableGraph(BaseModel):
    """
    Graph with an A/B bipartition of its vertices.

    Structural checks (vertex ranges, no loops, one color per vertex) run
    at construction; two-colorability and connectivity are checked by
    ``graphmc.validate_graph`` so the error can name the offending edge.

    Attributes:
        n: Number of vertices
        edges: Undirected edges as (u, v) with u < v
        colors: Color of each vertex

    Example:
        >>> g = TwoColorableGraph(n=2, edges=[(0, 1)], colors=[Color.A, Color.B])
        >>> g.neighbors(0)
        (1,)
    """

    name: str = Field(default="graph", description="Human-readable name")
    n: int = Field(..., ge=1, description="Vertex count")
    edges: list[tuple[int, int]] = Field(default_factory=list, description="Edge list")
    colors: list[Color] = Field(..., description="Color per vertex")

    model_config = ConfigDict(frozen=True)

    @field_validator("edges")
    @classmethod
    def _normalize_edges(cls, value: list[tuple[int, int]]) -> list[tuple[int, int]]:
        normalized = set()
        for u, v in value:
            if u == v:
                raise GraphValidationError(f"Self-loop on vertex {u}", edge=(u, v))
            normalized.add((min(u, v), max(u, v)))
        return sorted(normalized)

    @model_validator(mode="after")
    def _check_ranges(self) -> TwoColorableGraph:
        if len(self.colors) != self.n:
            raise ValueError(f"Expected {self.n} colors, got {len(self.colors)}")
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphValidationError(f"Edge ({u}, {v}) leaves the vertex range", edge=(u, v))
        return self

    @classmethod
    def from_file(cls, path: Path) -> TwoColorableGraph:
        """Load the JSON graph format {n, edges, colors[, name]}."""
        with open(path) as f:
            data = json.load(f)
        data.pop("_comment", None)
        data.setdefault("name", path.stem)
        return cls.model_validate(data)

    def neighbors(self, vertex: int) -> tuple[int, ...]:
        """V_j: vertices joined to ``vertex``."""
        out = [v for u, v in self.edges if u == vertex]
        out += [u for u, v in self.edges if v == vertex]
        return tuple(sorted(out))

    def vertices(self, color: Color) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.colors) if c == color)

    def color_mask(self, color: Color) -> np.ndarray:
        """Boolean mask of the vertices with ``color``."""
        return np.array([c == color for c in self.colors], dtype=bool)

    def adjacency_matrix(self) -> np.ndarray:
        """Symmetric 0/1 adjacency matrix (uint8)."""
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.edges:
            adj[u, v] = 1
            adj[v, u] = 1
        return adj

    def swapped(self) -> TwoColorableGraph:
        """Same graph with the A and B roles exchanged."""
        flipped = [Color.B if c == Color.A else Color.A for c in self.colors]
        return self.model_copy(update={"colors": flipped})


class LabelState(BaseModel):
    """
    Eigenvalue exponents mu of one graph-basis element.

    The all-zero vector is the target state |Psi_{0_A, 0_B}>.
    """

    mu: tuple[int, ...] = Field(..., description="mu_j in {0, 1}")

    model_config = ConfigDict(frozen=True)

    @field_validator("mu")
    @classmethod
    def _check_bits(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(bit not in (0, 1) for bit in value):
            raise ValueError(f"Labels must be bits, got {value}")
        return value

    @property
    def is_target(self) -> bool:
        return not any(self.mu)

    @classmethod
    def zeros(cls, n: int) -> LabelState:
        return cls(mu=(0,) * n)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.mu, dtype=np.uint8)


class MCConfig(BaseModel):
    """
    Configuration of one Monte Carlo purification run.

    Attributes:
        graph: Two-colorable graph of the shared state
        scheme: single or double selection
        noise: Gate and measurement noise
        f_ch: Per-qubit channel fidelity
        rounds: Purification rounds to run
        samples: Tuples formed per round
        seed: Master 64-bit seed
        local_vertices: Vertices not sent through a channel
        workers: Worker threads (results do not depend on this)
        chunk_size: Samples per RNG substream
        resample: Draw each round's tuples with replacement from the
            survivors (True) or group the survivors into disjoint tuples (False)
    """

    graph: TwoColorableGraph
    scheme: Scheme = Scheme.DOUBLE
    noise: NoiseParams
    f_ch: float = Field(..., ge=0.25, le=1.0, description="Channel fidelity, 0.25 admitted as a scan endpoint")
    rounds: int = Field(default=10, ge=0)
    samples: int = Field(default=1_000_000, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    local_vertices: tuple[int, ...] = Field(default=())
    workers: int = Field(default=1, ge=1)
    chunk_size: int = Field(default=65_536, ge=1)
    resample: bool = True

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_local_vertices(self) -> MCConfig:
        for vertex in self.local_vertices:
            if not 0 <= vertex < self.graph.n:
                raise ValueError(f"Local vertex {vertex} is not in the graph")
        return self


class RoundStats(BaseModel):
    """
    Statistics of one round. Round 0 describes the channel output.

    Attributes:
        round: Round index (0 = before purification)
        samples_in: Tuples processed this round
        accepted: Tuples passing post-selection
        acceptance_rate: accepted / samples_in
        fidelity: Fraction of accepted outputs with mu = 0
        stderr: sqrt(F (1 - F) / accepted)
    """

    round: int = Field(..., ge=0)
    samples_in: int = Field(..., ge=1)
    accepted: int = Field(..., ge=0)
    acceptance_rate: float = Field(..., ge=0.0, le=1.0)
    fidelity: float = Field(..., ge=0.0, le=1.0)
    stderr: float = Field(..., ge=0.0)

    @classmethod
    def from_counts(cls, round_index: int, samples_in: int, accepted: int, good: int) -> RoundStats:
        fidelity = good / accepted if accepted else 0.0
        stderr = math.sqrt(fidelity * (1.0 - fidelity) / accepted) if accepted else 0.0
        return cls(
            round=round_index,
            samples_in=samples_in,
            accepted=accepted,
            acceptance_rate=accepted / samples_in,
            fidelity=fidelity,
            stderr=stderr,
        )


class MCResult(BaseModel):
    """
    Result of a Monte Carlo purification run.

    Attributes:
        graph_name: Name of the simulated graph
        n: Vertex count
        scheme: Purification scheme
        f_ch: Channel fidelity
        noise: Noise provenance string
        seed: Master seed
        rounds: Per-round statistics, round 0 first
        yield_estimate: prod_n acceptance_n / N_A over the purification rounds
    """

    graph_name: str
    n: int
    scheme: Scheme
    f_ch: float
    noise: str
    seed: int
    rounds: list[RoundStats]
    yield_estimate: float = Field(..., ge=0.0, le=1.0)

    @property
    def initial_fidelity(self) -> float:
        return self.rounds[0].fidelity

    @property
    def final_fidelity(self) -> float:
        return self.rounds[-1].fidelity

    def plateau_fidelity(self, window: int = 3) -> float:
        """Mean fidelity over the last ``window`` rounds."""
        tail = self.rounds[-window:]
        return sum(r.fidelity for r in tail) / len(tail)

    def plateau_stderr(self, window: int = 3) -> float:
        """Largest per-round standard error over the last ``window`` rounds."""
        return max(r.stderr for r in self.rounds[-window:])


class MCNoisePoint(BaseModel):
    """
    Multipartite fixed points at one noise level p = p_g = p_m.

    Attributes:
        p: Noise level
        scheme: Purification scheme
        f_max: Plateau fidelity from the reference channel, None if it collapses
        f_max_stderr: Standard error of the plateau rounds
        f_min: Initial fidelity F_in at the lowest channel fidelity that
            still purifies, None if none does
        f_ch_min: That channel fidelity
    """

    p: float = Field(..., ge=0.0)
    scheme: Scheme
    f_max: Optional[float] = None
    f_max_stderr: Optional[float] = None
    f_min: Optional[float] = None
    f_ch_min: Optional[float] = None


class MCYieldPoint(BaseModel):
    """Rounds and yield at which a Monte Carlo run first reaches ``target_f``."""

    target_f: float = Field(..., ge=0.0, le=1.0)
    n_rounds: int = Field(..., ge=0)
    yield_: float = Field(..., ge=0.0, le=1.0, alias="yield")
    fidelity: float = Field(..., ge=0.0, le=1.0)
    stderr: float = Field(..., ge=0.0)

    model_config = ConfigDict(populate_by_name=True)
