"""
Report schemas produced by the dynamics engine.

These models are what the orchestrator serializes to CSV/JSON:
- FixedPointReport: F_max / F_min / F_mix of a purification map
- YieldReport: rounds and yield to reach a target fidelity
- WorkingRangeRow / ThresholdPoint: working-range scans (Fig. 4 data)
- CurvePoint: purification curve samples (Fig. 3 data)
- NoiseScanPoint: fixed points along p = p_g = p_m (Fig. 5 data)
"""

from typing import Optional

from pydantic import BaseModel, Field, model_validator

from purification.schemas.bell import BellVector
from purification.schemas.tensors import Scheme

F_MIX = 0.25


class FixedPointReport(BaseModel):
    """
    Fixed points of a purification map.

    Attributes:
        scheme: Purification scheme of the map
        f_max: Attracting fixed point reached from a nearly perfect channel
            vector, if non-trivial
        f_min: Channel fidelity where the purification curve crosses the
            diagonal upwards, if f_max exists
        f_mix: The completely mixed fixed point (1/4, 1/4, 1/4, 1/4)
        converged: Whether the f_max iteration met the convergence tolerance
        iterations: Iterations used to locate f_max
    """

    scheme: Scheme
    f_max: Optional[BellVector] = Field(default=None, description="Purified fixed point")
    f_min: Optional[float] = Field(default=None, description="Minimum required channel fidelity")
    f_mix: BellVector = Field(
        default_factory=lambda: BellVector(f=(F_MIX, F_MIX, F_MIX, F_MIX)),
        description="Completely mixed fixed point"
    )
    converged: bool = Field(default=True, description="f_max iteration converged")
    iterations: int = Field(default=0, ge=0, description="Iterations used for f_max")

    @model_validator(mode="after")
    def _check_ordering(self) -> "FixedPointReport":
        if self.f_max is not None and self.f_min is not None:
            if not (self.f_max.fidelity > self.f_min > F_MIX):
                raise ValueError(
                    f"Fixed points out of order: f_max={self.f_max.fidelity}, "
                    f"f_min={self.f_min}"
                )
        return self

    @property
    def has_purified_point(self) -> bool:
        return self.f_max is not None


class YieldReport(BaseModel):
    """
    Resources needed to reach a target fidelity from a channel.

    Attributes:
        scheme: Purification scheme
        target_f: Target fidelity F
        f_ch: Channel fidelity
        n_rounds: Minimum number of rounds n_A(F, F_ch)
        yield_: [prod_n N_A / p_A(F^(n-1))]^-1 (serialized as "yield")
        per_round_success: p_A at each round
        final: State vector after n_rounds
    """

    scheme: Scheme
    target_f: float = Field(..., ge=0.0, le=1.0)
    f_ch: float = Field(..., ge=0.25, le=1.0)
    n_rounds: int = Field(..., ge=0)
    yield_: float = Field(..., gt=0.0, le=1.0, alias="yield")
    per_round_success: list[float] = Field(default_factory=list)
    final: BellVector

    model_config = {"populate_by_name": True}

    @model_validator(mode="after")
    def _check_yield_bound(self) -> "YieldReport":
        bound = (1.0 / self.scheme.copies) ** self.n_rounds
        if self.yield_ > bound * (1.0 + 1e-12):
            raise ValueError(f"Yield {self.yield_} exceeds (1/N_A)^n = {bound}")
        return self


class WorkingRangeRow(BaseModel):
    """One grid point of a working-range scan."""

    p_g: float
    p_m: float
    scheme: Scheme
    f_max: Optional[float] = None
    f_min: Optional[float] = None
    inside: bool


class ThresholdPoint(BaseModel):
    """Largest gate error p_g with a purified fixed point, for one p_m."""

    scheme: Scheme
    p_m: float
    p_g_threshold: Optional[float] = Field(
        default=None,
        description="None when even p_g at the lower grid edge is outside"
    )


class CurvePoint(BaseModel):
    """One point of a purification curve F_in -> F_out."""

    f_in: float
    f_out: float
    success_prob: float


class NoiseScanPoint(BaseModel):
    """F_max and F_min at one point of the diagonal p = p_g = p_m (Fig. 5 data)."""

    p: float = Field(..., ge=0.0)
    scheme: Scheme
    f_max: Optional[float] = None
    f_min: Optional[float] = None
    inside: bool
