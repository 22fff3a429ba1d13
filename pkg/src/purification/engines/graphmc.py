"""
GraphMCEngine - Monte Carlo purification of two-colorable graph states.

All operations are Clifford and all noise is Pauli or an outcome flip, so
a noisy graph state stays diagonal in the graph basis. Each sample is a
label vector mu (one bit per vertex); the engine pushes whole batches of
label vectors through the purification circuit as uint8 arrays of shape
(samples, n).

One round on copies (source, ancilla 1[, ancilla 2]):

    multilateral C-Not source -> ancilla 1, gate noise on every vertex
    [multilateral C-Not ancilla 2 -> ancilla 1, gate noise]
    measure ancilla 1 (A-role labels checked)
    [measure ancilla 2 (B-role labels checked)]

and the A/B roles are exchanged before the next round.

Randomness comes from numpy SeedSequence substreams keyed by
(seed, round, chunk), so results do not depend on the worker count.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Optional, TypeVar, Union

import networkx as nx
import numpy as np

from purification.config import Settings
from purification.engines.base import BaseEngine, StatisticsExhaustedError
from purification.schemas import (
    F_MIX,
    Color,
    GraphValidationError,
    LabelState,
    MCConfig,
    MCNoisePoint,
    MCResult,
    MCYieldPoint,
    NoiseParams,
    RoundStats,
    Scheme,
    TwoColorableGraph,
)
from purification.tools.bellalgebra import family_noise

logger = logging.getLogger(__name__)

ENGINE_NAME = "GraphMCEngine"

# (x, z) bits of I, X, Y, Z
_PAULI_X = np.array([0, 1, 1, 0], dtype=np.uint8)
_PAULI_Z = np.array([0, 0, 1, 1], dtype=np.uint8)
_PAULI_NAMES = {"I": 0, "X": 1, "Y": 2, "Z": 3}

T = TypeVar("T")


# =============================================================================
# Graph checks and label algebra
# =============================================================================

def to_networkx(g: TwoColorableGraph) -> nx.Graph:
    """networkx view of the graph with a ``color`` node attribute."""
    graph = nx.Graph(name=g.name)
    graph.add_nodes_from((v, {"color": c.value}) for v, c in enumerate(g.colors))
    graph.add_edges_from(g.edges)
    return graph


def validate_graph(g: TwoColorableGraph, strict_connectivity: bool = False) -> TwoColorableGraph:
    """
    Check that the coloring is a proper two-coloring and the graph is connected.

    Raises:
        GraphValidationError: For an edge inside one color class, or for a
            disconnected graph when ``strict_connectivity`` is set
    """
    graph = to_networkx(g)
    for u, v in g.edges:
        if g.colors[u] == g.colors[v]:
            hint = "" if nx.is_bipartite(graph) else "; the graph has an odd cycle"
            raise GraphValidationError(
                f"Edge ({u}, {v}) joins two {g.colors[u].value} vertices{hint}",
                edge=(u, v),
            )
    if g.n > 1 and not nx.is_connected(graph):
        parts = nx.number_connected_components(graph)
        message = f"Graph '{g.name}' is disconnected ({parts} components)"
        if strict_connectivity:
            raise GraphValidationError(message)
        logger.warning(message)
    return g


def bipartition(n: int, edges: Sequence[tuple[int, int]]) -> list[Color]:
    """
    A/B coloring of an uncolored graph; vertex 0 of each component is A.

    Raises:
        GraphValidationError: If the graph is not two-colorable
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_edges_from(edges)
    try:
        coloring = nx.bipartite.color(graph)
    except nx.NetworkXError as e:
        cycle = nx.find_cycle(graph)
        u, v = cycle[0][0], cycle[0][1]
        raise GraphValidationError(f"Graph is not two-colorable: {e}", edge=(u, v)) from e
    root = {v: min(component) for component in nx.connected_components(graph) for v in component}
    return [Color.A if coloring[v] == coloring[root[v]] else Color.B for v in range(n)]


def _pauli_index(pauli: Union[int, str]) -> int:
    if isinstance(pauli, str):
        if pauli.upper() not in _PAULI_NAMES:
            raise ValueError(f"Unknown Pauli {pauli!r}")
        return _PAULI_NAMES[pauli.upper()]
    if not 0 <= pauli <= 3:
        raise ValueError(f"Pauli index must be in 0..3, got {pauli}")
    return pauli


def pauli_label_flips(g: TwoColorableGraph, q: int, pauli: Union[int, str]) -> frozenset[int]:
    """
    Labels flipped by a Pauli on qubit ``q``.

    Z_q anticommutes with K_q only, X_q with K_j for j in V_q, and Y_q
    with both sets.

    Example:
        >>> g = TwoColorableGraph(n=3, edges=[(0, 1), (1, 2)], colors=["A", "B", "A"])
        >>> sorted(pauli_label_flips(g, 1, "Y"))
        [0, 1, 2]
    """
    if not 0 <= q < g.n:
        raise ValueError(f"Qubit {q} is not a vertex of a {g.n}-vertex graph")
    index = _pauli_index(pauli)
    flips: set[int] = set()
    if _PAULI_Z[index]:
        flips.add(q)
    if _PAULI_X[index]:
        flips.symmetric_difference_update(g.neighbors(q))
    return frozenset(flips)


class _Layout:
    """Arrays describing one A/B role assignment of a graph."""

    def __init__(self, g: TwoColorableGraph):
        self.n = g.n
        self.adjacency = g.adjacency_matrix().astype(np.int64)
        self.a_mask = g.color_mask(Color.A)
        self.b_mask = ~self.a_mask

    def flips(self, paulis: np.ndarray) -> np.ndarray:
        """Label flips of a batch of Pauli strings given as indices (samples, n)."""
        x = _PAULI_X[paulis].astype(np.int64)
        z = _PAULI_Z[paulis]
        return z ^ ((x @ self.adjacency) & 1).astype(np.uint8)


# =============================================================================
# Batched circuit pieces
# =============================================================================

def _sample_channel_batch(
    layout: _Layout,
    f_ch: float,
    size: int,
    rng: np.random.Generator,
    local_vertices: Sequence[int] = (),
) -> np.ndarray:
    r = (1.0 - f_ch) / 3.0
    paulis = rng.choice(4, size=(size, layout.n), p=[f_ch, r, r, r])
    if local_vertices:
        paulis[:, list(local_vertices)] = 0
    return layout.flips(paulis)


def _multilateral_cnot(source: np.ndarray, ancilla: np.ndarray, layout: _Layout) -> None:
    """In place: mu_B(source) ^= mu_B(ancilla), mu_A(ancilla) ^= mu_A(source)."""
    source[:, layout.b_mask] ^= ancilla[:, layout.b_mask]
    ancilla[:, layout.a_mask] ^= source[:, layout.a_mask]


def _gate_noise(
    source: np.ndarray,
    ancilla: np.ndarray,
    layout: _Layout,
    gate_probs: np.ndarray,
    rng: np.random.Generator,
) -> None:
    """
    In place: one two-qubit Pauli error per vertex, p[i][j] with s_i on the
    physical control and s_j on the physical target.

    At A vertices the ancilla copy holds the control qubit, at B vertices
    the source copy does.
    """
    errors = rng.choice(16, size=source.shape, p=gate_probs)
    on_control, on_target = np.divmod(errors, 4)
    a = layout.a_mask
    source ^= layout.flips(np.where(a, on_target, on_control))
    ancilla ^= layout.flips(np.where(a, on_control, on_target))


def _syndrome_passes(
    copy: np.ndarray,
    checked: np.ndarray,
    layout: _Layout,
    p_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Measure a copy (X on checked vertices, Z elsewhere) and test all checked
    stabilizer outcomes for +1.

    A flipped outcome at vertex k corrupts K_k's own reading and the
    readings of its neighbors.
    """
    syndrome = copy
    if p_m > 0.0:
        f = (rng.random(copy.shape) < p_m).astype(np.int64)
        syndrome = copy ^ (f ^ ((f @ layout.adjacency) & 1)).astype(np.uint8)
    return ~np.any(syndrome[:, checked], axis=1)


def _round_batch(
    scheme: Scheme,
    copies: Sequence[np.ndarray],
    layout: _Layout,
    noise: NoiseParams,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """One purification round on a batch; returns (accepted mask, outputs)."""
    source = copies[0].copy()
    ancilla = copies[1].copy()
    noisy = noise.p_g > 0.0
    gate_probs = np.asarray(noise.p, dtype=float).ravel()

    _multilateral_cnot(source, ancilla, layout)
    if noisy:
        _gate_noise(source, ancilla, layout, gate_probs, rng)
    if scheme is Scheme.DOUBLE:
        second = copies[2].copy()
        _multilateral_cnot(second, ancilla, layout)
        if noisy:
            _gate_noise(second, ancilla, layout, gate_probs, rng)

    accepted = _syndrome_passes(ancilla, layout.a_mask, layout, noise.p_m, rng)
    if scheme is Scheme.DOUBLE:
        accepted &= _syndrome_passes(second, layout.b_mask, layout, noise.p_m, rng)
    return accepted, source


# =============================================================================
# Single-sample operations
# =============================================================================

def sample_channel(
    g: TwoColorableGraph,
    f_ch: float,
    rng: np.random.Generator,
    local_vertices: Sequence[int] = (),
) -> LabelState:
    """
    Labels after sending every qubit (except ``local_vertices``) through
    the depolarizing channel of fidelity ``f_ch``.
    """
    if not 0.25 <= f_ch <= 1.0:
        raise ValueError(f"f_ch must be in [1/4, 1], got {f_ch}")
    mu = _sample_channel_batch(_Layout(g), f_ch, 1, rng, local_vertices)[0]
    return LabelState(mu=tuple(int(b) for b in mu))


def mc_round(
    scheme: Scheme,
    copies: Sequence[LabelState],
    g: TwoColorableGraph,
    noise: NoiseParams,
    rng: np.random.Generator,
) -> tuple[bool, LabelState]:
    """
    One noisy purification round on a single tuple of copies.

    Raises:
        ValueError: If the number of copies does not match the scheme or a
            label vector has the wrong length
    """
    if len(copies) != scheme.copies:
        raise ValueError(
            f"{scheme.value} selection takes {scheme.copies} copies, got {len(copies)}"
        )
    for copy in copies:
        if len(copy.mu) != g.n:
            raise ValueError(f"Label vector of length {len(copy.mu)} on a {g.n}-vertex graph")
    batch = [copy.as_array()[None, :] for copy in copies]
    accepted, out = _round_batch(scheme, batch, _Layout(g), noise, rng)
    return bool(accepted[0]), LabelState(mu=tuple(int(b) for b in out[0]))


def multi_upper_bound(n: int, p_g: float) -> float:
    """
    First-order ceiling 1 - n (4/15) p_g for uniform gate noise on n qubits.

    Example:
        >>> round(multi_upper_bound(7, 0.015), 12)
        0.972
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 1.0 - n * 4.0 / 15.0 * p_g


# =============================================================================
# Engine
# =============================================================================

def _substream(seed: int, round_index: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(round_index, chunk)))


class GraphMCEngine(BaseEngine[MCConfig, MCResult]):
    """
    Monte Carlo recurrence on a graph state.

    Each round forms ``cfg.samples`` tuples from the survivors of the
    previous round (with replacement, or as disjoint groups when
    ``cfg.resample`` is off), runs them through one round in chunks of
    ``cfg.chunk_size`` and keeps the accepted outputs.

    Example:
        >>> engine = GraphMCEngine()
        >>> graph = TwoColorableGraph.from_file(engine.settings.bell_pair_graph_file)
        >>> cfg = engine.config(graph, Scheme.DOUBLE, uniform_noise(0.01), f_ch=0.9, samples=10_000)
        >>> len(engine.run(cfg).rounds)
        11
    """

    name: str = ENGINE_NAME

    def __init__(self, settings: Optional[Settings] = None):
        super().__init__(settings)

    def config(
        self,
        graph: TwoColorableGraph,
        scheme: Scheme,
        noise: NoiseParams,
        f_ch: float,
        rounds: int = 10,
        seed: int = 0,
        samples: Optional[int] = None,
        workers: Optional[int] = None,
        **overrides: object,
    ) -> MCConfig:
        """MCConfig with sample count, chunking and workers taken from Settings."""
        fields: dict[str, object] = {
            "graph": graph,
            "scheme": scheme,
            "noise": noise,
            "f_ch": f_ch,
            "rounds": rounds,
            "seed": seed,
            "samples": samples or self.settings.mc_samples,
            "workers": workers or self.settings.mc_workers,
            "chunk_size": self.settings.mc_chunk_size,
        }
        fields.update(overrides)
        return MCConfig.model_validate(fields)

    def run(self, request: MCConfig) -> MCResult:
        return self.mc_purification(request)

    def _map_chunks(
        self, cfg: MCConfig, total: int, work: Callable[[int, int, int], T]
    ) -> list[T]:
        """Apply ``work(chunk, start, stop)`` to every chunk, results in chunk order."""
        bounds = [
            (chunk, start, min(start + cfg.chunk_size, total))
            for chunk, start in enumerate(range(0, total, cfg.chunk_size))
        ]
        if cfg.workers == 1 or len(bounds) == 1:
            return [work(*b) for b in bounds]
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(lambda b: work(*b), bounds))

    def _initial_pool(self, cfg: MCConfig, layout: _Layout) -> np.ndarray:
        def work(chunk: int, start: int, stop: int) -> np.ndarray:
            rng = _substream(cfg.seed, 0, chunk)
            return _sample_channel_batch(layout, cfg.f_ch, stop - start, rng, cfg.local_vertices)

        # Enough channel outputs to form the first round's tuples
        size = cfg.samples * cfg.scheme.copies if not cfg.resample else cfg.samples
        return np.concatenate(self._map_chunks(cfg, size, work))

    def initial_fidelity(self, cfg: MCConfig) -> RoundStats:
        """Round-0 statistics: fraction of channel outputs with mu = 0."""
        validate_graph(cfg.graph)
        pool = self._initial_pool(cfg, _Layout(cfg.graph))
        good = int(np.count_nonzero(~pool.any(axis=1)))
        return RoundStats.from_counts(0, len(pool), len(pool), good)

    @staticmethod
    def _round_chunk(
        cfg: MCConfig,
        pool: np.ndarray,
        layout: _Layout,
        round_index: int,
        chunk: int,
        start: int,
        stop: int,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Tuples [start, stop) of one round: (accepted mask, accepted outputs)."""
        copies = cfg.scheme.copies
        rng = _substream(cfg.seed, round_index, chunk)
        if cfg.resample:
            picks = rng.integers(0, len(pool), size=(stop - start, copies))
            batch = [pool[picks[:, c]] for c in range(copies)]
        else:
            batch = [pool[copies * start + c: copies * stop: copies] for c in range(copies)]
        accepted, out = _round_batch(cfg.scheme, batch, layout, cfg.noise, rng)
        return accepted, out[accepted]

    def mc_purification(self, cfg: MCConfig) -> MCResult:
        """
        Run the recurrence for ``cfg.rounds`` rounds.

        Raises:
            GraphValidationError: For an invalid graph
            StatisticsExhaustedError: If no tuple can be formed or none is
                accepted in some round
        """
        validate_graph(cfg.graph)
        layouts = (_Layout(cfg.graph), _Layout(cfg.graph.swapped()))
        copies = cfg.scheme.copies

        pool = self._initial_pool(cfg, layouts[0])
        good = int(np.count_nonzero(~pool.any(axis=1)))
        stats = [RoundStats.from_counts(0, len(pool), len(pool), good)]
        logger.info(
            f"{cfg.graph.name} {cfg.scheme.value}: F_in={stats[0].fidelity:.6f} "
            f"({len(pool)} channel samples)"
        )

        yield_estimate = 1.0
        for round_index in range(1, cfg.rounds + 1):
            # Frame exchange: odd rounds use the given roles, even rounds the swapped ones
            layout = layouts[(round_index - 1) % 2]
            tuples = cfg.samples if cfg.resample else len(pool) // copies
            if tuples == 0 or len(pool) == 0:
                raise StatisticsExhaustedError(self.name, round_index)

            work = partial(self._round_chunk, cfg, pool, layout, round_index)
            results = self._map_chunks(cfg, tuples, work)
            accepted_count = sum(int(np.count_nonzero(a)) for a, _ in results)
            if accepted_count == 0:
                raise StatisticsExhaustedError(self.name, round_index)
            pool = np.concatenate([out for _, out in results])
            good = int(np.count_nonzero(~pool.any(axis=1)))
            round_stats = RoundStats.from_counts(round_index, tuples, accepted_count, good)
            stats.append(round_stats)
            yield_estimate *= round_stats.acceptance_rate / copies
            logger.debug(
                f"round {round_index}: F={round_stats.fidelity:.6f} "
                f"+- {round_stats.stderr:.2e}, acceptance={round_stats.acceptance_rate:.4f}"
            )

        return MCResult(
            graph_name=cfg.graph.name,
            n=cfg.graph.n,
            scheme=cfg.scheme,
            f_ch=cfg.f_ch,
            noise=cfg.noise.label,
            seed=cfg.seed,
            rounds=stats,
            yield_estimate=yield_estimate,
        )

    # -------------------------------------------------------------------------
    # Scans
    # -------------------------------------------------------------------------

    def mc_fidelity_scan(
        self,
        cfg: MCConfig,
        p_grid: Sequence[float],
        noise_kind: str = "uniform",
    ) -> list[tuple[float, MCResult]]:
        """Recurrence along the diagonal p = p_g = p_m, everything else from ``cfg``."""
        out = []
        for p in p_grid:
            point = cfg.model_copy(update={"noise": family_noise(noise_kind, p, p)})
            result = self.mc_purification(point)
            logger.info(
                f"{cfg.scheme.value} p={p:g}: plateau F={result.plateau_fidelity():.6f}"
            )
            out.append((p, result))
        return out

    def _holds(self, cfg: MCConfig, floor: float) -> Optional[MCResult]:
        """The run's result if it ends at or above ``floor``, None if it collapses."""
        try:
            result = self.mc_purification(cfg)
        except StatisticsExhaustedError as e:
            logger.debug(f"Collapsed: {e}")
            return None
        return result if result.final_fidelity >= floor else None

    def threshold_estimate(
        self,
        cfg: MCConfig,
        p_grid: Sequence[float],
        noise_kind: str = "uniform",
        floor: float = 0.5,
    ) -> Optional[float]:
        """
        Largest grid p, scanning upwards, before the recurrence collapses.

        A run has collapsed when its final fidelity ends below ``floor``
        or every tuple was rejected.
        """
        last_inside: Optional[float] = None
        for p in sorted(p_grid):
            point = cfg.model_copy(update={"noise": family_noise(noise_kind, p, p)})
            if self._holds(point, floor) is None:
                break
            last_inside = p
        return last_inside

    def mc_fixed_points(
        self,
        cfg: MCConfig,
        p: float,
        floor: float = 0.5,
        fch_tol: float = 0.01,
    ) -> MCNoisePoint:
        """
        F_max and F_min of the recurrence for the noise in ``cfg``.

        F_max is the plateau reached from ``cfg.f_ch``. F_min is the initial
        fidelity at the lowest channel fidelity that still purifies, found by
        bisection on F_ch down to ``fch_tol``.
        """
        reference = self._holds(cfg, floor)
        if reference is None:
            logger.info(f"{cfg.scheme.value} p={p:g}: collapses from F_ch={cfg.f_ch}")
            return MCNoisePoint(p=p, scheme=cfg.scheme)

        lo, hi, lowest = F_MIX, cfg.f_ch, reference
        while hi - lo > fch_tol:
            mid = 0.5 * (lo + hi)
            result = self._holds(cfg.model_copy(update={"f_ch": mid}), floor)
            if result is None:
                lo = mid
            else:
                hi, lowest = mid, result
        logger.info(
            f"{cfg.scheme.value} p={p:g}: F_max={reference.plateau_fidelity():.6f} "
            f"F_min={lowest.initial_fidelity:.6f} (F_ch={hi:.4f})"
        )
        return MCNoisePoint(
            p=p,
            scheme=cfg.scheme,
            f_max=reference.plateau_fidelity(),
            f_max_stderr=reference.plateau_stderr(),
            f_min=lowest.initial_fidelity,
            f_ch_min=hi,
        )

    def mc_noise_scan(
        self,
        cfg: MCConfig,
        p_grid: Sequence[float],
        noise_kind: str = "uniform",
        floor: float = 0.5,
        fch_tol: float = 0.01,
    ) -> list[MCNoisePoint]:
        """mc_fixed_points along the diagonal p = p_g = p_m."""
        return [
            self.mc_fixed_points(
                cfg.model_copy(update={"noise": family_noise(noise_kind, p, p)}), p, floor, fch_tol
            )
            for p in p_grid
        ]

    def mc_yield_curve(self, cfg: MCConfig, targets: Sequence[float]) -> list[MCYieldPoint]:
        """
        First round at which one run reaches each target, with the yield
        accumulated up to that round. Targets never reached are skipped.
        """
        result = self.mc_purification(cfg)
        copies = cfg.scheme.copies
        points = []
        for target in targets:
            cumulative = 1.0
            for stats in result.rounds:
                if stats.round > 0:
                    cumulative *= stats.acceptance_rate / copies
                if stats.fidelity >= target:
                    points.append(
                        MCYieldPoint(
                            target_f=target,
                            n_rounds=stats.round,
                            yield_=cumulative,
                            fidelity=stats.fidelity,
                            stderr=stats.stderr,
                        )
                    )
                    break
            else:
                logger.debug(f"Target {target} not reached in {cfg.rounds} rounds")
        return points
