"""
Settings - Toolkit configuration loaded from environment.

Uses pydantic-settings for validation and .env file support.
"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Toolkit settings loaded from environment variables.

    Every field can be overridden with a ``PURIFY_``-prefixed variable,
    and a .env file in the working directory is honoured for local runs.

    Attributes:
        log_level: Logging level
        data_dir: Directory containing shipped graph files
        output_dir: Default directory for emitted CSV/JSON artifacts
        mc_samples: Default Monte Carlo samples per data point
        mc_chunk_size: Samples per RNG substream
        mc_workers: Thread pool size for Monte Carlo chunks
        max_iterations: Iteration cap for map iteration
        convergence_tol: Infinity-norm step that ends an iteration
        fidelity_tol: Bisection tolerance on fidelities
        threshold_tol: Bisection tolerance on noise thresholds

    Example:
        >>> settings = Settings()
        >>> settings.max_iterations
        10000
    """

    # Logging
    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)"
    )

    # Directories
    data_dir: Path = Field(
        default=Path(__file__).parent.parent.parent.parent / "data",
        description="Directory containing graph files"
    )
    output_dir: Path = Field(
        default=Path("results"),
        description="Default directory for output artifacts"
    )

    # Monte Carlo
    mc_samples: int = Field(default=1_000_000, ge=1, description="Samples per data point")
    mc_chunk_size: int = Field(default=65_536, ge=1, description="Samples per RNG substream")
    mc_workers: int = Field(default=1, ge=1, description="Monte Carlo worker threads")

    # Numerics
    max_iterations: int = Field(default=10_000, ge=1, description="Map iteration cap")
    convergence_tol: float = Field(default=1e-12, gt=0, description="Iteration stop step")
    fidelity_tol: float = Field(default=1e-9, gt=0, description="F_min bisection tolerance")
    threshold_tol: float = Field(default=1e-4, gt=0, description="Threshold bisection tolerance")

    model_config = SettingsConfigDict(
        env_prefix="PURIFY_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @property
    def steane_graph_file(self) -> Path:
        """Path to the shipped 7-vertex graph (Steane |0_L> up to local Hadamards)."""
        return self.data_dir / "steane7_graph.json"

    @property
    def bell_pair_graph_file(self) -> Path:
        """Path to the 2-vertex Bell-pair graph."""
        return self.data_dir / "bell_pair_graph.json"


def get_settings() -> Settings:
    """
    Get toolkit settings.

    Returns:
        Settings instance
    """
    return Settings()
