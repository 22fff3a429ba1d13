"""
Tools module - deterministic building blocks used by the engines.

ARCHITECTURE NOTE:
- Tools are DETERMINISTIC - no sampling and no iteration to convergence.
- Tools are pure functions over the pydantic schemas.
- Tools are called BY engines; they never call an engine.

Available tools:
- bellalgebra: Bell vectors, Pauli label permutations, noise families
- tensorgen: Transition tensors of one round in label space
- oracle: Exact density-matrix simulation of one round (independent check on tensorgen)
"""

from purification.tools.bellalgebra import (
    channel_initial_vector,
    family_noise,
    kay_noise,
    make_noise,
    noise_from_spec,
    normalize,
    pauli_action,
    pauli_group,
    uniform_noise,
)
from purification.tools.oracle import (
    simulate_double_round_exact,
    simulate_round_exact,
    simulate_single_round_exact,
)
from purification.tools.tensorgen import (
    build_double_tensor,
    build_map,
    build_single_tensor,
    build_tensor,
    elementary_tensors,
)

__all__ = [
    "channel_initial_vector",
    "family_noise",
    "kay_noise",
    "make_noise",
    "noise_from_spec",
    "normalize",
    "pauli_action",
    "pauli_group",
    "uniform_noise",
    "simulate_double_round_exact",
    "simulate_round_exact",
    "simulate_single_round_exact",
    "build_double_tensor",
    "build_map",
    "build_single_tensor",
    "build_tensor",
    "elementary_tensors",
]
