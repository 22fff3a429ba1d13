"""
Noise and channel parameters.

Gate noise follows a perfect C-Not with a two-qubit Pauli channel

    N(rho) = (1 - p_g) rho + sum_{(i,j) != (0,0)} p_ij (s_i x s_j) rho (s_i x s_j)

where s_i acts on the control and s_j on the target qubit. Measurements
flip their classical outcome with probability p_m. The distribution
channel depolarizes one qubit with fidelity F_ch.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from purification.schemas.bell import PROBABILITY_TOL

NoiseTable = tuple[
    tuple[float, float, float, float],
    tuple[float, float, float, float],
    tuple[float, float, float, float],
    tuple[float, float, float, float],
]


class NoiseParams(BaseModel):
    """
    Local-operation noise: gate error table and measurement flip probability.

    Attributes:
        p: 4x4 table, p[i][j] is the probability of s_i (control) x s_j (target)
        p_m: Measurement outcome flip probability, in [0, 1/2]
        label: Short provenance string (e.g. "uniform:0.02")
        nominal_p_g: Family parameter (sum of q_i for the kay family)

    Example:
        >>> from purification.tools.bellalgebra import make_noise
        >>> noise = make_noise(("uniform", 0.15), p_m=0.0)
        >>> round(noise.p[1][2], 12)
        0.01
    """

    p: NoiseTable = Field(..., description="Gate error table p_ij")
    p_m: float = Field(
        default=0.0,
        ge=0.0,
        le=0.5,
        description="Measurement flip probability"
    )
    label: str = Field(default="custom", description="Provenance string")
    nominal_p_g: Optional[float] = Field(
        default=None,
        ge=0.0,
        description="Scan parameter of a parameterized family, when it differs from p_g"
    )

    model_config = ConfigDict(frozen=True)

    @field_validator("p")
    @classmethod
    def _check_entries(cls, value: NoiseTable) -> NoiseTable:
        for i, row in enumerate(value):
            for j, entry in enumerate(row):
                if entry < 0.0:
                    raise ValueError(f"Negative gate error probability p_{i}{j} = {entry}")
        return value

    @model_validator(mode="after")
    def _check_normalization(self) -> NoiseParams:
        total = sum(sum(row) for row in self.p)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"Gate error table sums to {total!r}, not 1")
        if self.p_g >= 1.0:
            raise ValueError(f"Gate error probability p_g = {self.p_g} must be < 1")
        return self

    @property
    def p_g(self) -> float:
        """Total gate error probability sum_{(i,j) != (0,0)} p_ij."""
        return sum(
            self.p[i][j] for i in range(4) for j in range(4) if (i, j) != (0, 0)
        )

    @property
    def scan_p_g(self) -> float:
        """The p_g a scan or report refers to: nominal_p_g if set, else p_g."""
        return self.p_g if self.nominal_p_g is None else self.nominal_p_g

    def is_uniform(self, tol: float = 1e-14) -> bool:
        """True when every off-(0,0) entry equals p_g/15."""
        target = self.p_g / 15.0
        return all(
            abs(self.p[i][j] - target) <= tol
            for i in range(4)
            for j in range(4)
            if (i, j) != (0, 0)
        )

    def describe(self) -> dict[str, object]:
        """Serializable summary for CSV/JSON provenance."""
        return {
            "label": self.label,
            "p_g": self.p_g,
            "nominal_p_g": self.scan_p_g,
            "p_m": self.p_m,
            "table": [list(row) for row in self.p],
        }


class ChannelParams(BaseModel):
    """
    Distribution channel: identity with probability F_ch, else X, Y or Z.

    The completely mixed endpoint F_ch = 1/4 is admitted.

    Attributes:
        f_ch: Channel fidelity in [1/4, 1]
    """

    f_ch: float = Field(
        ...,
        ge=0.25,
        le=1.0,
        description="Channel fidelity; 0.25 is the fully mixed channel, admitted as a scan endpoint",
    )

    model_config = ConfigDict(frozen=True)
