"""
Tests for Pydantic schema models.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from purification.schemas import (
    BellVector,
    ChannelParams,
    Color,
    Command,
    DensityMatrix,
    FixedPointReport,
    LabelState,
    MCConfig,
    NoiseParams,
    RoundStats,
    RunConfig,
    Scheme,
    SingleTensor,
    TwoColorableGraph,
    YieldReport,
    label_from_bits,
    parse_grid,
)


def uniform_table(p_g: float) -> list[list[float]]:
    rows = [[p_g / 15.0] * 4 for _ in range(4)]
    rows[0][0] = 1.0 - p_g
    return rows


class TestBellVector:
    """Tests for BellVector."""

    def test_fidelity(self):
        """The fidelity is the first entry."""
        assert BellVector(f=(0.7, 0.1, 0.1, 0.1)).fidelity == 0.7

    def test_must_sum_to_one(self):
        """Unnormalized vectors are rejected."""
        with pytest.raises(ValidationError):
            BellVector(f=(0.7, 0.1, 0.1, 0.2))

    def test_entry_range(self):
        """Negative entries are rejected."""
        with pytest.raises(ValidationError):
            BellVector(f=(1.1, -0.1, 0.0, 0.0))

    def test_frozen(self):
        """Vectors are immutable."""
        v = BellVector(f=(1.0, 0.0, 0.0, 0.0))
        with pytest.raises(ValidationError):
            v.f = (0.25, 0.25, 0.25, 0.25)

    def test_distance(self):
        """Infinity-norm distance."""
        a = BellVector(f=(1.0, 0.0, 0.0, 0.0))
        b = BellVector(f=(0.7, 0.1, 0.1, 0.1))
        assert a.distance(b) == pytest.approx(0.3)

    def test_label_bits(self):
        """Labels 0..3 are I, X, Y, Z."""
        assert [label_from_bits(x, z) for x, z in ((0, 0), (1, 0), (1, 1), (0, 1))] == [0, 1, 2, 3]


class TestNoiseParams:
    """Tests for NoiseParams."""

    def test_p_g(self):
        """p_g is the total off-identity weight."""
        noise = NoiseParams(p=uniform_table(0.03), p_m=0.01)
        assert noise.p_g == pytest.approx(0.03)
        assert noise.scan_p_g == pytest.approx(0.03)
        assert noise.is_uniform()

    def test_table_must_sum_to_one(self):
        """An unnormalized table is rejected."""
        table = uniform_table(0.03)
        table[0][0] = 0.9
        with pytest.raises(ValidationError):
            NoiseParams(p=table)

    def test_measurement_range(self):
        """p_m above 1/2 is rejected."""
        with pytest.raises(ValidationError):
            NoiseParams(p=uniform_table(0.0), p_m=0.6)

    def test_describe(self):
        """describe() carries the table and the label."""
        info = NoiseParams(p=uniform_table(0.03), label="uniform:0.03").describe()
        assert info["label"] == "uniform:0.03"
        assert len(info["table"]) == 4


class TestTensors:
    """Tests for transition tensor models."""

    def test_shape_checked(self):
        """A wrongly shaped array is rejected."""
        with pytest.raises(ValidationError):
            SingleTensor(s=np.zeros((4, 4)))

    def test_success_at_most_one(self):
        """Success probabilities above 1 are rejected."""
        s = np.zeros((4, 4, 4))
        s[0, 0, 0] = 1.5
        with pytest.raises(ValidationError):
            SingleTensor(s=s)

    def test_read_only(self):
        """Stored arrays cannot be written."""
        tensor = SingleTensor(s=np.zeros((4, 4, 4)))
        with pytest.raises(ValueError):
            tensor.s[0, 0, 0] = 1.0

    def test_copies(self):
        """N_A is 2 for single and 3 for double selection."""
        assert Scheme.SINGLE.copies == 2
        assert Scheme.DOUBLE.copies == 3


class TestReports:
    """Tests for report models."""

    def test_fixed_point_ordering(self):
        """F_max > F_min > 1/4 is enforced."""
        with pytest.raises(ValidationError):
            FixedPointReport(scheme=Scheme.SINGLE, f_max=BellVector(f=(0.9, 0.1, 0.0, 0.0)), f_min=0.95)

    def test_yield_alias(self):
        """The yield field serializes as "yield"."""
        report = YieldReport(
            scheme=Scheme.SINGLE, target_f=0.9, f_ch=0.8, n_rounds=1,
            yield_=0.4, final=BellVector(f=(0.9, 0.1, 0.0, 0.0)),
        )
        assert report.model_dump(by_alias=True)["yield"] == 0.4

    def test_yield_bound(self):
        """The yield cannot beat (1/N_A)^n."""
        with pytest.raises(ValidationError):
            YieldReport(
                scheme=Scheme.SINGLE, target_f=0.9, f_ch=0.8, n_rounds=1,
                yield_=0.6, final=BellVector(f=(0.9, 0.1, 0.0, 0.0)),
            )


class TestDensityMatrix:
    """Tests for DensityMatrix."""

    def test_trace_checked(self):
        """Unnormalized matrices are rejected."""
        with pytest.raises(ValidationError):
            DensityMatrix(data=np.eye(4))

    def test_dimension_checked(self):
        """Dimensions must be powers of two."""
        with pytest.raises(ValidationError):
            DensityMatrix(data=np.eye(3) / 3.0)

    def test_qubits(self):
        """A 16-dimensional state has 4 qubits."""
        assert DensityMatrix(data=np.eye(16) / 16.0).n_qubits == 4


class TestGraphModels:
    """Tests for graph models."""

    def test_edges_normalized(self):
        """Edges are stored once with u < v."""
        g = TwoColorableGraph(n=3, edges=[(1, 0), (0, 1), (2, 1)], colors=["A", "B", "A"])
        assert g.edges == [(0, 1), (1, 2)]
        assert g.neighbors(1) == (0, 2)

    def test_self_loop(self):
        """Self-loops are rejected."""
        with pytest.raises(ValidationError):
            TwoColorableGraph(n=2, edges=[(1, 1)], colors=["A", "B"])

    def test_edge_range(self):
        """Edges must stay inside the vertex range."""
        with pytest.raises(ValidationError):
            TwoColorableGraph(n=2, edges=[(0, 2)], colors=["A", "B"])

    def test_swapped(self):
        """swapped() exchanges the roles."""
        g = TwoColorableGraph(n=2, edges=[(0, 1)], colors=["A", "B"])
        assert g.swapped().colors == [Color.B, Color.A]

    def test_adjacency(self):
        """The adjacency matrix is symmetric."""
        g = TwoColorableGraph(n=3, edges=[(0, 1), (1, 2)], colors=["A", "B", "A"])
        adj = g.adjacency_matrix()
        assert np.array_equal(adj, adj.T)
        assert adj.sum() == 4

    def test_label_bits(self):
        """Labels are bits."""
        assert LabelState.zeros(3).is_target
        with pytest.raises(ValidationError):
            LabelState(mu=(0, 2))

    def test_local_vertices_in_range(self):
        """Local vertices must belong to the graph."""
        g = TwoColorableGraph(n=2, edges=[(0, 1)], colors=["A", "B"])
        with pytest.raises(ValidationError):
            MCConfig(graph=g, noise=NoiseParams(p=uniform_table(0.0)), f_ch=0.9, local_vertices=(5,))

    def test_round_stats(self):
        """stderr is the binomial standard error."""
        stats = RoundStats.from_counts(1, samples_in=100, accepted=50, good=40)
        assert stats.fidelity == 0.8
        assert stats.acceptance_rate == 0.5
        assert stats.stderr == pytest.approx(np.sqrt(0.8 * 0.2 / 50))


class TestRunConfig:
    """Tests for RunConfig."""

    def test_grid(self):
        """Grids include the stop value."""
        assert parse_grid("0:0.1:0.05") == [0.0, 0.05, 0.1]

    def test_bad_grid(self):
        """A non-positive step is rejected."""
        with pytest.raises(ValueError):
            parse_grid("0:1:0")

    def test_extra_keys_forbidden(self):
        """Unknown fields are rejected."""
        with pytest.raises(ValidationError):
            RunConfig(command=Command.BOUNDS, noise="uniform:0.03", fidelityy=0.9)

    def test_working_range_needs_grids(self):
        """working-range takes grids and a bare kind."""
        with pytest.raises(ValidationError):
            RunConfig(command=Command.WORKING_RANGE, pg=0.01, pm="0:0.01:0.01")
        cfg = RunConfig(command=Command.WORKING_RANGE, pg="0:0.1:0.05", pm="0:0.01:0.01")
        assert cfg.pg_grid() == [0.0, 0.05, 0.1]

    def test_default_output(self, tmp_path):
        """Artifacts default to <command>_<scheme>.<format>."""
        cfg = RunConfig(command=Command.BOUNDS, noise="uniform:0.03")
        assert cfg.default_output(tmp_path) == tmp_path / "bounds_double.csv"

    def test_channel_fidelity_admits_mixed_endpoint(self):
        """F_ch = 1/4 is accepted and documented as the mixed endpoint; below it is not."""
        cfg = RunConfig(command=Command.MC_GRAPH, noise="uniform:0.01", fch=0.25)
        assert cfg.fch == 0.25
        with pytest.raises(ValidationError):
            RunConfig(command=Command.MC_GRAPH, noise="uniform:0.01", fch=0.2)
        assert "1/4" in RunConfig.model_fields["fch"].description
        assert "0.25" in ChannelParams.model_fields["f_ch"].description
