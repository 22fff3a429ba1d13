"""
Tests for the label-space transition tensors.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from purification.schemas import Scheme
from purification.tools.bellalgebra import kay_noise, uniform_noise
from purification.tools.tensorgen import (
    build_double_pre_selection,
    build_double_tensor,
    build_map,
    build_single_pre_selection,
    build_single_tensor,
    elementary_tensors,
    frame_exchange_matrix,
    frame_exchange_permutation,
    gate_noise_tensor,
    get_backend,
    ideal_cnot_tensor,
    measurement_tensors,
    single_gate_noise_tensor,
    tensor_success_probabilities,
    tensor_to_json,
)


class TestIdealCnot:
    """Tests for the ideal bilateral C-Not tensor."""

    def test_identity_on_clean_pairs(self):
        """(0, 0) maps to (0, 0)."""
        u = ideal_cnot_tensor()
        assert u[0, 0, 0, 0] == 1.0

    def test_y_y_to_x_z(self):
        """(2, 2) maps to (1, 3)."""
        u = ideal_cnot_tensor()
        assert u[1, 3, 2, 2] == 1.0
        assert u[:, :, 2, 2].sum() == 1.0

    def test_permutation(self):
        """Every input pair has exactly one output pair."""
        u = ideal_cnot_tensor()
        assert np.array_equal(u.sum(axis=(0, 1)), np.ones((4, 4)))
        assert np.array_equal(u.sum(axis=(2, 3)), np.ones((4, 4)))

    def test_phase_error_propagates_to_source(self):
        """A Z error on the ancilla is copied onto the source."""
        u = ideal_cnot_tensor()
        assert u[3, 3, 0, 3] == 1.0


class TestGateNoise:
    """Tests for the gate noise tensors."""

    def test_noiseless_is_identity(self):
        """p_g = 0 gives the identity on label pairs."""
        nn = gate_noise_tensor(uniform_noise(0.0))
        assert np.allclose(nn.reshape(16, 16), np.eye(16))

    def test_single_site_entry(self):
        """N^{00}_{10} = p_10."""
        noise = kay_noise((0.02, 0.01, 0.005))
        n = single_gate_noise_tensor(noise)
        assert n[0, 0, 1, 0] == pytest.approx(noise.p[1][0])

    def test_stochastic(self):
        """The bilateral noise sums to 1 over outputs for every input."""
        nn = gate_noise_tensor(uniform_noise(0.15))
        assert np.allclose(nn.sum(axis=(0, 1)), 1.0)

    def test_bilateral_composition(self):
        """The bilateral tensor is the square of the one-party 16x16 matrix."""
        noise = uniform_noise(0.15)
        single = single_gate_noise_tensor(noise).reshape(16, 16)
        nn = gate_noise_tensor(noise).reshape(16, 16)
        assert np.allclose(nn, single @ single)
        p00 = 0.85
        q = 0.01
        # Identity overall: both clean, or the same error twice
        assert nn[0, 0] == pytest.approx(p00**2 + 15 * q**2)


class TestMeasurementTensors:
    """Tests for the bilateral measurement tensors."""

    def test_perfect_measurement(self):
        """p_m = 0 never moves a label out of its class."""
        mz, mx = measurement_tensors(0.0)
        assert np.allclose(mz, np.eye(4))
        assert np.allclose(mx, np.eye(4))

    def test_coincidence_flip(self):
        """p_m = 0.02 keeps the class with 0.9608 and flips it with 0.0392."""
        mz, _ = measurement_tensors(0.02)
        assert mz[0, 0] == pytest.approx(0.9608)
        assert mz[1, 0] == pytest.approx(0.0392)
        assert np.allclose(mz.sum(axis=0), 1.0)

    def test_x_is_conjugated_z(self):
        """mx = H mz H."""
        mz, mx = measurement_tensors(0.05)
        h = frame_exchange_matrix()
        assert np.allclose(mx, h @ mz @ h)

    def test_out_of_range(self):
        """p_m above 1/2 is rejected."""
        with pytest.raises(ValueError):
            measurement_tensors(0.7)


class TestFrameExchange:
    """Tests for the frame exchange."""

    def test_permutation(self):
        """0 and 2 are fixed, 1 and 3 swap."""
        assert frame_exchange_permutation() == (0, 3, 2, 1)

    def test_involution(self):
        """Applying it twice is the identity."""
        h = frame_exchange_matrix()
        assert np.array_equal(h @ h, np.eye(4))

    def test_elementary_bundle(self):
        """The bundle carries the same permutation."""
        parts = elementary_tensors(uniform_noise(0.01, 0.01))
        assert parts.hh == frame_exchange_permutation()
        assert parts.u.shape == (4, 4, 4, 4)


class TestSingleTensor:
    """Tests for the single-selection tensor."""

    def test_ideal_clean_input(self):
        """(0, 0) is kept with output 0."""
        s = build_single_tensor(uniform_noise(0.0)).s
        assert s[:, 0, 0].tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_ideal_bit_error_discarded(self):
        """An X error on the ancilla is detected."""
        s = build_single_tensor(uniform_noise(0.0)).s
        assert s[:, 0, 1].sum() == 0.0

    def test_ideal_phase_error_passes(self):
        """A Z error on the ancilla reaches the source and is frame-exchanged to label 1."""
        s = build_single_tensor(uniform_noise(0.0)).s
        assert s[1, 0, 3] == 1.0

    def test_pre_selection_conserves_probability(self):
        """Before post-selection every input has total weight 1."""
        pre = build_single_pre_selection(uniform_noise(0.04, 0.02))
        assert np.allclose(pre.sum(axis=(0, 1)), 1.0)

    def test_success_in_unit_interval(self):
        """Per-input success probabilities lie in [0, 1]."""
        success = tensor_success_probabilities(build_single_tensor(uniform_noise(0.1, 0.05)))
        assert np.all(success >= 0.0)
        assert np.all(success <= 1.0 + 1e-12)


class TestDoubleTensor:
    """Tests for the double-selection tensor."""

    def test_ideal_clean_input(self):
        """(0, 0, 0) is kept with output 0."""
        d = build_double_tensor(uniform_noise(0.0)).d
        assert d[:, 0, 0, 0].tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_ideal_propagated_phase_error_discarded(self):
        """A Z error on the first ancilla is caught by the second one."""
        d = build_double_tensor(uniform_noise(0.0)).d
        assert d[:, 0, 3, 0].sum() == 0.0

    def test_ideal_source_phase_error(self):
        """A Z error on the source passes and is frame-exchanged to label 1."""
        d = build_double_tensor(uniform_noise(0.0)).d
        assert d[1, 3, 0, 0] == 1.0

    def test_pre_selection_conserves_probability(self):
        """Before post-selection every input has total weight 1."""
        pre = build_double_pre_selection(uniform_noise(0.04, 0.02))
        assert np.allclose(pre.sum(axis=(0, 1, 2)), 1.0)

    def test_stricter_than_single(self):
        """With perfect gates, double selection accepts no more often than single."""
        noise = uniform_noise(0.0, 0.02)
        single = build_single_tensor(noise).success_by_input()
        double = build_double_tensor(noise).success_by_input()
        for j in range(4):
            for k in range(4):
                assert double[j, k, 0] <= single[j, k] + 1e-12


class TestMaps:
    """Tests for map construction and dumps."""

    def test_backends(self):
        """Both backend names resolve; unknown names fail."""
        assert get_backend("tensor") is not None
        assert get_backend("exact") is not None
        with pytest.raises(ValueError):
            get_backend("magic")

    def test_build_map(self):
        """Maps carry the scheme and a provenance label."""
        m = build_map(Scheme.DOUBLE, uniform_noise(0.02, 0.01))
        assert m.copies_per_round == 3
        assert "uniform:0.02" in m.label

    def test_json_dump(self):
        """The dump nests entries in row-major order."""
        noise = uniform_noise(0.02)
        tensor = build_single_tensor(noise)
        dump = tensor_to_json(tensor, noise)
        assert dump["scheme"] == "single"
        assert dump["entries"][1][0][3] == pytest.approx(float(tensor.s[1, 0, 3]))
        assert dump["noise"]["p_g"] == pytest.approx(0.02)
