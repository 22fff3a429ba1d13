"""
Exact density-matrix simulation of one purification round.

This is a DETERMINISTIC tool and the independent check on tensorgen: it
never touches label algebra. Each Bell input is prepared as a projector,
pushed through the physical circuit (C-Nots, two-qubit Pauli noise,
noisy measurements, bilateral Hadamard) and read out by projecting on
the Bell basis.

Qubit layout (qubit 0 = most significant bit):
    single: [A_s, B_s, A_1, B_1]              16-dim
    double: [A_s, B_s, A_1, B_1, A_2, B_2]     64-dim
"""

import itertools
import logging
from functools import lru_cache

import numpy as np

from purification.schemas import (
    DensityMatrix,
    DoubleTensor,
    NoiseParams,
    Scheme,
    SingleTensor,
    TransitionTensor,
)

logger = logging.getLogger(__name__)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
SIGMA = (_I2, _X, _Y, _Z)

# (x, z) bits of s_0..s_3, up to phase
_PAULI_BITS = ((0, 0), (1, 0), (1, 1), (0, 1))


@lru_cache(maxsize=1)
def bell_projectors() -> tuple[np.ndarray, ...]:
    """
    Projectors on phi_j = (s_j x s_0)(|00> + |11>)/sqrt(2), j = 0..3.

    Example:
        >>> phi = bell_projectors()
        >>> float(phi[0][0, 3].real)
        0.5
    """
    phi0 = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
    out = []
    for sigma in SIGMA:
        v = np.kron(sigma, _I2) @ phi0
        out.append(np.outer(v, v.conj()))
    return tuple(out)


# =============================================================================
# Batched circuit primitives on arrays of shape (batch, d, d)
# =============================================================================

def _bit(n_qubits: int, q: int) -> int:
    return 1 << (n_qubits - 1 - q)


def _cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    flip = (idx & _bit(n_qubits, control)) != 0
    return np.where(flip, idx ^ _bit(n_qubits, target), idx)


def _conjugate_pauli(rho: np.ndarray, x_mask: int, z_mask: int) -> np.ndarray:
    """P rho P^dagger for P = X^x Z^z (global phase drops out)."""
    d = rho.shape[-1]
    idx = np.arange(d)
    src = idx ^ x_mask
    parity = np.array([bin(int(b) & z_mask).count("1") & 1 for b in src])
    sign = 1.0 - 2.0 * parity
    return rho[..., src[:, None], src[None, :]] * np.outer(sign, sign)


def _apply_cnot(rho: np.ndarray, n_qubits: int, control: int, target: int) -> np.ndarray:
    perm = _cnot_permutation(n_qubits, control, target)
    # CNOT is an involutive permutation: (C rho C)[a, b] = rho[perm a, perm b]
    return rho[..., perm[:, None], perm[None, :]]


def _apply_pauli_noise(
    rho: np.ndarray, n_qubits: int, control: int, target: int, noise: NoiseParams
) -> np.ndarray:
    out = np.zeros_like(rho)
    for i, j in itertools.product(range(4), repeat=2):
        weight = noise.p[i][j]
        if weight == 0.0:
            continue
        xi, zi = _PAULI_BITS[i]
        xj, zj = _PAULI_BITS[j]
        x_mask = xi * _bit(n_qubits, control) | xj * _bit(n_qubits, target)
        z_mask = zi * _bit(n_qubits, control) | zj * _bit(n_qubits, target)
        out += weight * _conjugate_pauli(rho, x_mask, z_mask)
    return out


def _noisy_cnot_array(
    rho: np.ndarray, n_qubits: int, control: int, target: int, noise: NoiseParams
) -> np.ndarray:
    return _apply_pauli_noise(
        _apply_cnot(rho, n_qubits, control, target), n_qubits, control, target, noise
    )


def apply_noisy_cnot(
    rho: DensityMatrix,
    control: int,
    target: int,
    noise: NoiseParams,
) -> DensityMatrix:
    """
    Perfect C-Not followed by the two-qubit Pauli channel on (control, target).

    For a bilateral gate call this once for Alice's pair of qubits and
    once for Bob's.

    Raises:
        ValueError: If control equals target or an index is out of range
    """
    n = rho.n_qubits
    if control == target:
        raise ValueError(f"Control and target are both qubit {control}")
    for q in (control, target):
        if not 0 <= q < n:
            raise ValueError(f"Qubit {q} out of range for {n} qubits")
    out = _noisy_cnot_array(rho.data[None], n, control, target, noise)[0]
    return DensityMatrix(data=(out + out.conj().T) / 2.0)


# =============================================================================
# Readout operators
# =============================================================================

def _coincidence_povm(p_m: float) -> np.ndarray:
    """
    Kept-outcome POVM element of a bilateral Z measurement on one pair.

    Diagonal over the true outcomes (t_A, t_B): an equal pair is reported
    coincident with (1-p_m)^2 + p_m^2, an unequal pair with 2 p_m (1-p_m).
    """
    same = (1.0 - p_m) ** 2 + p_m**2
    differ = 2.0 * p_m * (1.0 - p_m)
    return np.diag([same, differ, differ, same]).astype(complex)


def _frame_exchanged_projectors() -> np.ndarray:
    """(H x H) phi_i (H x H) for every i, stacked."""
    hh = np.kron(_H, _H)
    return np.stack([hh @ phi @ hh for phi in bell_projectors()])


def _readout_operators(scheme: Scheme, p_m: float) -> np.ndarray:
    z_kept = _coincidence_povm(p_m)
    if scheme is Scheme.SINGLE:
        ancilla = z_kept
    else:
        hh = np.kron(_H, _H)
        ancilla = np.kron(z_kept, hh @ z_kept @ hh)
    return np.stack([np.kron(op, ancilla) for op in _frame_exchanged_projectors()])


def _bell_inputs(copies: int) -> np.ndarray:
    """All products phi_j x phi_k (x phi_l), row-major in (j, k, l)."""
    phi = bell_projectors()
    states = []
    for labels in itertools.product(range(4), repeat=copies):
        state = np.ones((1, 1), dtype=complex)
        for label in labels:
            state = np.kron(state, phi[label])
        states.append(state)
    return np.stack(states)


def _simulate(scheme: Scheme, noise: NoiseParams) -> np.ndarray:
    copies = scheme.copies
    n = 2 * copies
    rho = _bell_inputs(copies)
    # Bilateral gate source -> ancilla 1
    rho = _noisy_cnot_array(rho, n, 0, 2, noise)
    rho = _noisy_cnot_array(rho, n, 1, 3, noise)
    if scheme is Scheme.DOUBLE:
        # Bilateral gate ancilla 2 -> ancilla 1
        rho = _noisy_cnot_array(rho, n, 4, 2, noise)
        rho = _noisy_cnot_array(rho, n, 5, 3, noise)
    readout = _readout_operators(scheme, noise.p_m)
    # weights[i, input] = Re Tr[readout_i rho_input]
    weights = np.einsum("iab,nba->in", readout, rho).real
    weights = np.clip(weights, 0.0, None)
    return weights.reshape((4,) + (4,) * copies)


def simulate_single_round_exact(noise: NoiseParams) -> SingleTensor:
    """Single-selection tensor S[i, j, k] from the 16-dim simulation."""
    return SingleTensor(s=_simulate(Scheme.SINGLE, noise))


def simulate_double_round_exact(noise: NoiseParams) -> DoubleTensor:
    """Double-selection tensor D[i, j, k, l] from the 64-dim simulation."""
    return DoubleTensor(d=_simulate(Scheme.DOUBLE, noise))


def simulate_round_exact(scheme: Scheme, noise: NoiseParams) -> TransitionTensor:
    if scheme is Scheme.SINGLE:
        return simulate_single_round_exact(noise)
    return simulate_double_round_exact(noise)
