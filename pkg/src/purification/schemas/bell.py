"""
Bell-diagonal value types.

A Bell-diagonal two-qubit state is fully described by the probabilities
of the four Bell states

    |phi_j> = (sigma_j (x) sigma_0)(|00> + |11>)/sqrt(2),   j = 0..3

so the state vector F = (F_0, F_1, F_2, F_3) is the whole state. Pauli
operators act on these labels as permutations.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# Tolerance used for every probability-vector check in the package.
PROBABILITY_TOL = 1e-12

# Bell label <-> (x, z) Pauli bits: I, X, Y, Z.
LABEL_BITS: tuple[tuple[int, int], ...] = ((0, 0), (1, 0), (1, 1), (0, 1))


def label_from_bits(x: int, z: int) -> int:
    """Inverse of LABEL_BITS."""
    return LABEL_BITS.index((x & 1, z & 1))


class BellVector(BaseModel):
    """
    Probability 4-vector over the Bell states phi_0..phi_3.

    Attributes:
        f: (F_0, F_1, F_2, F_3), each in [0, 1], summing to 1 within 1e-12

    Example:
        >>> v = BellVector(f=(0.7, 0.1, 0.1, 0.1))
        >>> v.fidelity
        0.7
    """

    f: tuple[float, float, float, float] = Field(
        ...,
        description="Bell-state probabilities (F_0, F_1, F_2, F_3)"
    )

    model_config = ConfigDict(frozen=True)

    @field_validator("f")
    @classmethod
    def _check_probabilities(
        cls, value: tuple[float, float, float, float]
    ) -> tuple[float, float, float, float]:
        for entry in value:
            if not (-PROBABILITY_TOL <= entry <= 1.0 + PROBABILITY_TOL):
                raise ValueError(f"Bell probability out of range: {entry}")
        total = sum(value)
        if abs(total - 1.0) > PROBABILITY_TOL:
            raise ValueError(f"Bell probabilities sum to {total!r}, not 1")
        return value

    @property
    def fidelity(self) -> float:
        """Overlap F_0 with the target Bell state phi_0."""
        return self.f[0]

    def as_array(self) -> np.ndarray:
        """Return the vector as a float numpy array."""
        return np.asarray(self.f, dtype=float)

    @classmethod
    def from_array(cls, values: np.ndarray) -> BellVector:
        """Build from an already-normalized array."""
        a, b, c, d = (float(x) for x in values)
        return cls(f=(a, b, c, d))

    def distance(self, other: BellVector) -> float:
        """Infinity-norm distance to another vector."""
        return float(np.max(np.abs(self.as_array() - other.as_array())))


class PauliPermutation(BaseModel):
    """
    Permutation of the Bell labels {0, 1, 2, 3}.

    ``perm[a]`` is the label of the Bell state obtained from phi_a.

    Example:
        >>> x = PauliPermutation(perm=(1, 0, 3, 2))
        >>> x.apply(2)
        3
    """

    perm: tuple[int, int, int, int] = Field(
        ...,
        description="Image of each label 0..3"
    )

    model_config = ConfigDict(frozen=True)

    @field_validator("perm")
    @classmethod
    def _check_bijection(cls, value: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
        if sorted(value) != [0, 1, 2, 3]:
            raise ValueError(f"Not a permutation of 0..3: {value}")
        return value

    def apply(self, label: int) -> int:
        """Image of a single label."""
        return self.perm[label]

    def compose(self, other: PauliPermutation) -> PauliPermutation:
        """Return self after other (apply ``other`` first)."""
        a, b, c, d = (self.perm[other.perm[i]] for i in range(4))
        return PauliPermutation(perm=(a, b, c, d))

    def inverse(self) -> PauliPermutation:
        """Inverse permutation."""
        inv = [0, 0, 0, 0]
        for src, dst in enumerate(self.perm):
            inv[dst] = src
        return PauliPermutation(perm=(inv[0], inv[1], inv[2], inv[3]))

    @property
    def is_identity(self) -> bool:
        return self.perm == (0, 1, 2, 3)

    def matrix(self) -> np.ndarray:
        """0/1 matrix M with M[dst, src] = 1."""
        out = np.zeros((4, 4))
        for src, dst in enumerate(self.perm):
            out[dst, src] = 1.0
        return out
