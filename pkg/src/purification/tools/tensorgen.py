"""
Transition tensor construction in label space.

This is a DETERMINISTIC tool. One purification round is composed from
small elementary tensors, all indexed outputs first:

    U[i, j, a, b]    ideal bilateral C-Not (source a, ancilla b -> i, j)
    N[c, d, a, b]    gate noise on one party's C-Not
    NN = N . N       bilateral gate noise (Alice's gate, then Bob's)
    G = NN . U       noisy bilateral C-Not
    MZ[l, b]         bilateral Z measurement (observed coincidence class l)
    MX[n, d]         bilateral X measurement
    H[i, a]          frame exchange (labels 1 <-> 3)

Z coincidence keeps observed labels {0, 3}; X coincidence keeps {0, 1}.
"""

import logging
from collections.abc import Callable
from typing import Any, Union

import numpy as np

from purification.schemas import (
    LABEL_BITS,
    DoubleTensor,
    ElementaryTensors,
    NoiseParams,
    PurificationMap,
    Scheme,
    SingleTensor,
    TransitionTensor,
    label_from_bits,
)
from purification.tools.bellalgebra import pauli_action
from purification.tools.oracle import simulate_round_exact

logger = logging.getLogger(__name__)

Z_KEPT = (0, 3)
X_KEPT = (0, 1)


def ideal_cnot_tensor() -> np.ndarray:
    """
    U[i, j, a, b] = 1 iff (a, b) -> (i, j) under the bilateral C-Not.

    With labels as (x, z) bits the source keeps x and picks up the
    ancilla's z, the ancilla keeps z and picks up the source's x.
    """
    u = np.zeros((4, 4, 4, 4))
    for a, (xa, za) in enumerate(LABEL_BITS):
        for b, (xb, zb) in enumerate(LABEL_BITS):
            i = label_from_bits(xa, za ^ zb)
            j = label_from_bits(xa ^ xb, zb)
            u[i, j, a, b] = 1.0
    return u


def single_gate_noise_tensor(noise: NoiseParams) -> np.ndarray:
    """N[c, d, a, b] = p_ij for c = P_{s_i}(a), d = P_{s_j}(b)."""
    n = np.zeros((4, 4, 4, 4))
    perms = [pauli_action(i).perm for i in range(4)]
    for i in range(4):
        for j in range(4):
            for a in range(4):
                for b in range(4):
                    n[perms[i][a], perms[j][b], a, b] += noise.p[i][j]
    return n


def gate_noise_tensor(noise: NoiseParams) -> np.ndarray:
    """Bilateral noise (N . N)[k, m, a, b] = sum_{cd} N[k, m, c, d] N[c, d, a, b]."""
    n = single_gate_noise_tensor(noise)
    return np.einsum("kmcd,cdab->kmab", n, n)


def measurement_tensors(p_m: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Bilateral measurement tensors (MZ, MX), each indexed [observed, actual].

    One party's flip m toggles the observed coincidence class; composing
    Alice's and Bob's flips gives (1-p_m)^2 + p_m^2 to keep the class and
    2 p_m (1-p_m) to toggle it.
    """
    if not 0.0 <= p_m <= 0.5:
        raise ValueError(f"p_m must be in [0, 1/2], got {p_m}")
    # Z basis: a flipped outcome toggles the x bit (P_{s_1})
    flip_x = pauli_action(1).matrix()
    m = (1.0 - p_m) * np.eye(4) + p_m * flip_x
    mz = m @ m
    h = frame_exchange_matrix()
    mx = h @ mz @ h
    return mz, mx


def frame_exchange_permutation() -> tuple[int, int, int, int]:
    """Bilateral Hadamard on labels: 0 -> 0, 1 -> 3, 2 -> 2, 3 -> 1."""
    return (0, 3, 2, 1)


def frame_exchange_matrix() -> np.ndarray:
    """H[i, a] = 1 iff i is the frame-exchanged image of a."""
    out = np.zeros((4, 4))
    for a, i in enumerate(frame_exchange_permutation()):
        out[i, a] = 1.0
    return out


def elementary_tensors(noise: NoiseParams) -> ElementaryTensors:
    """Bundle of the building blocks for one noise setting."""
    mz, mx = measurement_tensors(noise.p_m)
    return ElementaryTensors(
        u=ideal_cnot_tensor(),
        nn=gate_noise_tensor(noise),
        mz=mz,
        mx=mx,
        hh=frame_exchange_permutation(),
    )


def _noisy_cnot(parts: ElementaryTensors) -> np.ndarray:
    """G[i, j, a, b] = sum_{cd} NN[i, j, c, d] U[c, d, a, b]."""
    return np.einsum("ijcd,cdab->ijab", parts.nn, parts.u)


def build_single_pre_selection(noise: NoiseParams) -> np.ndarray:
    """
    Single-selection round before post-selection.

    Returns S~[i, l, j, k]: source j, ancilla k -> output i with observed
    ancilla class l. Sums to 1 over (i, l) for every input.
    """
    parts = elementary_tensors(noise)
    g = _noisy_cnot(parts)
    h = frame_exchange_matrix()
    return np.einsum("ia,lb,abjk->iljk", h, parts.mz, g)


def build_double_pre_selection(noise: NoiseParams) -> np.ndarray:
    """
    Double-selection round before post-selection.

    Returns D~[i, m, n, j, k, l]: source j, ancillas k and l. The first
    gate acts on (source, ancilla 1), the second on (ancilla 2 as control,
    ancilla 1 as target); m is ancilla 1's Z class, n ancilla 2's X class.
    """
    parts = elementary_tensors(noise)
    g = _noisy_cnot(parts)
    h = frame_exchange_matrix()
    return np.einsum("ia,mc,nd,dclb,abjk->imnjkl", h, parts.mz, parts.mx, g, g)


def build_single_tensor(noise: NoiseParams) -> SingleTensor:
    """S[i, j, k] = S~[i, 0, j, k] + S~[i, 3, j, k]."""
    pre = build_single_pre_selection(noise)
    return SingleTensor(s=pre[:, list(Z_KEPT)].sum(axis=1))


def build_double_tensor(noise: NoiseParams) -> DoubleTensor:
    """D[i, j, k, l] = sum over m in {0, 3}, n in {0, 1} of D~[i, m, n, j, k, l]."""
    pre = build_double_pre_selection(noise)
    kept = pre[:, list(Z_KEPT)][:, :, list(X_KEPT)]
    return DoubleTensor(d=kept.sum(axis=(1, 2)))


def build_tensor(scheme: Scheme, noise: NoiseParams) -> TransitionTensor:
    if scheme is Scheme.SINGLE:
        return build_single_tensor(noise)
    return build_double_tensor(noise)


def tensor_success_probabilities(tensor: TransitionTensor) -> np.ndarray:
    """Per-input success probability (sum over the output label)."""
    return tensor.success_by_input()


def get_backend(name: str) -> Callable[[Scheme, NoiseParams], TransitionTensor]:
    """
    Tensor source by name: ``tensor`` (label space) or ``exact`` (density matrices).

    Raises:
        ValueError: For an unknown backend name
    """
    if name == "tensor":
        return build_tensor
    if name == "exact":
        return simulate_round_exact
    raise ValueError(f"Unknown tensor backend: {name!r}")


def build_map(
    scheme: Scheme,
    noise: NoiseParams,
    backend: str = "tensor",
) -> PurificationMap:
    """Purification map for a scheme and noise setting."""
    tensor = get_backend(backend)(scheme, noise)
    logger.debug(f"Built {scheme.value} tensor ({backend}) for {noise.label}, p_m={noise.p_m}")
    return PurificationMap(tensor=tensor, label=f"{noise.label};p_m={noise.p_m:g};{backend}")


def tensor_to_json(tensor: TransitionTensor, noise: NoiseParams) -> dict[str, Any]:
    """
    Dump format: {"scheme", "noise", "entries"} with entries nested in
    row-major [i][j][k](l) order.
    """
    entries: Union[list[Any], Any] = tensor.array.tolist()
    return {
        "scheme": tensor.scheme.value,
        "noise": noise.describe(),
        "entries": entries,
    }
