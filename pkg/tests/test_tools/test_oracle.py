"""
Tests for the exact density-matrix simulator and its agreement with tensorgen.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from purification.schemas import DensityMatrix, NoiseParams, Scheme
from purification.tools.bellalgebra import custom_noise, uniform_noise
from purification.tools.oracle import (
    SIGMA,
    apply_noisy_cnot,
    bell_projectors,
    simulate_double_round_exact,
    simulate_round_exact,
    simulate_single_round_exact,
)
from purification.tools.tensorgen import build_tensor


def random_noise(rng: np.random.Generator, max_pg: float = 0.2, max_pm: float = 0.1) -> NoiseParams:
    """Random gate table with p_g <= max_pg and p_m <= max_pm."""
    p_g = rng.uniform(0.0, max_pg)
    errors = rng.dirichlet(np.ones(15)) * p_g
    table = np.zeros((4, 4))
    table.flat[1:] = errors
    table[0, 0] = 1.0 - p_g
    return custom_noise(table.tolist(), p_m=rng.uniform(0.0, max_pm))


class TestBellProjectors:
    """Tests for the Bell projectors."""

    def test_orthonormal(self):
        """Tr(phi_i phi_j) = delta_ij."""
        phi = bell_projectors()
        for i in range(4):
            for j in range(4):
                overlap = np.trace(phi[i] @ phi[j]).real
                assert overlap == pytest.approx(1.0 if i == j else 0.0, abs=1e-15)

    def test_phi0_corners(self):
        """phi_0 has 1/2 at the four corners."""
        phi0 = bell_projectors()[0].real
        for a in (0, 3):
            for b in (0, 3):
                assert phi0[a, b] == pytest.approx(0.5)
        assert phi0[1, 1] == 0.0

    def test_sigma_z_gives_phi3(self):
        """(s_3 x s_0) phi_0 (s_3 x s_0) = phi_3."""
        phi = bell_projectors()
        op = np.kron(SIGMA[3], SIGMA[0])
        assert np.allclose(op @ phi[0] @ op.conj().T, phi[3])


class TestNoisyCnot:
    """Tests for apply_noisy_cnot."""

    @staticmethod
    def bilateral(rho: DensityMatrix, noise: NoiseParams) -> DensityMatrix:
        rho = apply_noisy_cnot(rho, 0, 2, noise)
        return apply_noisy_cnot(rho, 1, 3, noise)

    def test_clean_pairs_invariant(self):
        """phi_0 x phi_0 is a fixed point of the ideal bilateral C-Not."""
        phi = bell_projectors()
        rho = DensityMatrix.from_projectors(phi[0], phi[0])
        out = self.bilateral(rho, uniform_noise(0.0))
        assert np.allclose(out.data, rho.data)

    def test_phase_error_propagates(self):
        """phi_0 x phi_3 becomes phi_3 x phi_3."""
        phi = bell_projectors()
        rho = DensityMatrix.from_projectors(phi[0], phi[3])
        out = self.bilateral(rho, uniform_noise(0.0))
        assert np.allclose(out.data, np.kron(phi[3], phi[3]))

    def test_trace_preserving(self):
        """The noisy gate keeps a random state normalized."""
        rng = np.random.default_rng(11)
        a = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = a @ a.conj().T
        rho = (rho + rho.conj().T) / 2.0
        rho = DensityMatrix(data=rho / np.trace(rho).real)
        out = self.bilateral(rho, uniform_noise(0.3))
        assert np.trace(out.data).real == pytest.approx(1.0, abs=1e-12)

    def test_index_collision(self):
        """Control and target must differ."""
        phi = bell_projectors()
        rho = DensityMatrix.from_projectors(phi[0], phi[0])
        with pytest.raises(ValueError):
            apply_noisy_cnot(rho, 2, 2, uniform_noise(0.0))

    def test_index_out_of_range(self):
        """Qubit indices must exist."""
        phi = bell_projectors()
        rho = DensityMatrix.from_projectors(phi[0], phi[0])
        with pytest.raises(ValueError):
            apply_noisy_cnot(rho, 0, 4, uniform_noise(0.0))


class TestExactRounds:
    """Tests for the exact round simulations."""

    def test_single_noiseless_fixed_point(self):
        """(0, 0) is kept with weight 1 on output 0."""
        s = simulate_single_round_exact(uniform_noise(0.0)).s
        assert s[:, 0, 0] == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-12)

    def test_single_discards_bit_error(self):
        """(0, 1) is never kept."""
        s = simulate_single_round_exact(uniform_noise(0.0)).s
        assert s[:, 0, 1].sum() == pytest.approx(0.0, abs=1e-12)

    def test_double_discards_propagated_phase_error(self):
        """(0, 3, 0) is never kept."""
        d = simulate_double_round_exact(uniform_noise(0.0)).d
        assert d[:, 0, 3, 0].sum() == pytest.approx(0.0, abs=1e-12)

    def test_double_noiseless_fixed_point(self):
        """(0, 0, 0) is kept with weight 1 on output 0."""
        d = simulate_double_round_exact(uniform_noise(0.0)).d
        assert d[:, 0, 0, 0] == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-12)

    def test_double_success_with_measurement_noise(self):
        """Two independent coincidences each survive with 1 - 2 p_m (1 - p_m)."""
        p_m = 0.02
        d = simulate_double_round_exact(uniform_noise(0.0, p_m)).d
        expected = (1.0 - 2.0 * p_m * (1.0 - p_m)) ** 2
        assert d[:, 0, 0, 0].sum() == pytest.approx(expected, abs=1e-12)


class TestOracleEquivalence:
    """The label-space tensors must equal the density-matrix simulation."""

    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_reference_point(self, scheme):
        """uniform p_g = 0.04, p_m = 0.02 agrees entrywise."""
        noise = uniform_noise(0.04, 0.02)
        exact = simulate_round_exact(scheme, noise).array
        labels = build_tensor(scheme, noise).array
        assert np.max(np.abs(exact - labels)) < 1e-12

    def test_asymmetric_table(self):
        """A table without symmetries still agrees (gate orientation matters)."""
        table = [[0.0] * 4 for _ in range(4)]
        table[1][0] = 0.03
        table[0][3] = 0.02
        table[3][2] = 0.01
        noise = custom_noise(table, p_m=0.03)
        for scheme in Scheme:
            exact = simulate_round_exact(scheme, noise).array
            labels = build_tensor(scheme, noise).array
            assert np.max(np.abs(exact - labels)) < 1e-12

    @pytest.mark.slow
    @pytest.mark.parametrize("scheme", [Scheme.SINGLE, Scheme.DOUBLE])
    def test_random_noise(self, scheme):
        """100 random noise settings agree within 1e-10."""
        rng = np.random.default_rng(2024)
        for _ in range(100):
            noise = random_noise(rng)
            exact = simulate_round_exact(scheme, noise).array
            labels = build_tensor(scheme, noise).array
            assert np.max(np.abs(exact - labels)) < 1e-10, noise.describe()
