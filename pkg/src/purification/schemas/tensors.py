"""
Transition probability tensors and purification maps.

Index conventions (outputs first):
- SingleTensor.s[i, j, k]    = S^{jk}_i   (source j, ancilla k -> output i)
- DoubleTensor.d[i, j, k, l] = D^{jkl}_i  (source j, ancillas k, l -> output i)

Entries are unnormalized: summing over the output index gives the
probability that an input passes post-selection.
"""

from __future__ import annotations

from enum import Enum
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from purification.schemas.bell import PROBABILITY_TOL


class Scheme(str, Enum):
    """
    Purification scheme.

    The value is also the CLI/CSV spelling.
    """
    SINGLE = "single"   # one ancilla pair, Z coincidence
    DOUBLE = "double"   # two ancilla pairs, Z and X coincidence

    @property
    def copies(self) -> int:
        """Pairs consumed per round (N_A)."""
        return 2 if self is Scheme.SINGLE else 3


def _frozen_array(value: Any, shape: tuple[int, ...], name: str) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {array.shape}")
    if np.any(array < -PROBABILITY_TOL):
        raise ValueError(f"{name} has negative entries (min {array.min()!r})")
    array.setflags(write=False)
    return array


def _check_success(per_input: np.ndarray, name: str) -> None:
    if np.any(per_input > 1.0 + 1e-10):
        raise ValueError(f"{name} success probability exceeds 1 (max {per_input.max()!r})")


class SingleTensor(BaseModel):
    """
    Single-selection transition tensor S^{jk}_i.

    Attributes:
        s: Array of shape (4, 4, 4) indexed [i, j, k]
    """

    s: np.ndarray = Field(..., description="S[i, j, k] = S^{jk}_i")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("s", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, (4, 4, 4), "SingleTensor")

    @model_validator(mode="after")
    def _check_post_selection(self) -> SingleTensor:
        _check_success(self.success_by_input(), "SingleTensor")
        return self

    @property
    def scheme(self) -> Scheme:
        return Scheme.SINGLE

    @property
    def array(self) -> np.ndarray:
        return self.s

    def success_by_input(self) -> np.ndarray:
        """Sum over outputs for every (j, k)."""
        return self.s.sum(axis=0)


class DoubleTensor(BaseModel):
    """
    Double-selection transition tensor D^{jkl}_i.

    Attributes:
        d: Array of shape (4, 4, 4, 4) indexed [i, j, k, l]
    """

    d: np.ndarray = Field(..., description="D[i, j, k, l] = D^{jkl}_i")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("d", mode="before")
    @classmethod
    def _coerce(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, (4, 4, 4, 4), "DoubleTensor")

    @model_validator(mode="after")
    def _check_post_selection(self) -> DoubleTensor:
        _check_success(self.success_by_input(), "DoubleTensor")
        return self

    @property
    def scheme(self) -> Scheme:
        return Scheme.DOUBLE

    @property
    def array(self) -> np.ndarray:
        return self.d

    def success_by_input(self) -> np.ndarray:
        """Sum over outputs for every (j, k, l)."""
        return self.d.sum(axis=0)


TransitionTensor = Union[SingleTensor, DoubleTensor]


class ElementaryTensors(BaseModel):
    """
    Building blocks of one purification round in label space.

    Attributes:
        u: Ideal bilateral C-Not, u[i, j, a, b] = U^{ij}_{ab} (outputs i, j)
        nn: Bilateral gate noise, nn[k, m, a, b] = (N N)^{ab}_{km}
        mz: Bilateral Z measurement, mz[l, b] = M^b_l
        mx: Bilateral X measurement, mx[n, d] = M~^d_n
        hh: Frame-exchange label map, hh[a] = image of label a
    """

    u: np.ndarray
    nn: np.ndarray
    mz: np.ndarray
    mx: np.ndarray
    hh: tuple[int, int, int, int]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class PurificationMap(BaseModel):
    """
    A purification map A: F -> F' defined by its transition tensor.

    Attributes:
        tensor: SingleTensor (map S) or DoubleTensor (map D)
        label: Provenance of the tensor (noise description, backend)
    """

    tensor: TransitionTensor
    label: str = Field(default="", description="Provenance string")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def scheme(self) -> Scheme:
        return self.tensor.scheme

    @property
    def copies_per_round(self) -> int:
        """N_A: 2 for single selection, 3 for double selection."""
        return self.scheme.copies
