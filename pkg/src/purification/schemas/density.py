"""
Density matrix value type used by the exact simulator.
"""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


class DensityMatrix(BaseModel):
    """
    Trace-normalized state of ``n_qubits`` qubits.

    Qubit 0 is the most significant bit of the computational basis index
    (the ``np.kron`` ordering).

    Attributes:
        data: Complex array of shape (2^n, 2^n)
    """

    data: np.ndarray = Field(..., description="Matrix entries")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("data", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"Density matrix must be square, got shape {array.shape}")
        dim = array.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"Dimension {dim} is not a power of two")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _check_state(self) -> DensityMatrix:
        if np.max(np.abs(self.data - self.data.conj().T)) > HERMITIAN_TOL:
            raise ValueError("Density matrix is not Hermitian")
        trace = np.trace(self.data).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"Density matrix has trace {trace!r}")
        smallest = np.linalg.eigvalsh(self.data).min()
        if smallest < EIGENVALUE_FLOOR:
            raise ValueError(f"Density matrix has negative eigenvalue {smallest!r}")
        return self

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    @property
    def n_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @classmethod
    def from_projectors(cls, *factors: np.ndarray) -> DensityMatrix:
        """Tensor product of single-pair states, in qubit order."""
        out = np.ones((1, 1), dtype=complex)
        for factor in factors:
            out = np.kron(out, factor)
        return cls(data=out)

    def expectation(self, operator: np.ndarray) -> float:
        """Re Tr[operator rho]."""
        return float(np.trace(operator @ self.data).real)
