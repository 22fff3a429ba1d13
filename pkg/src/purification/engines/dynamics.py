"""
DynamicsEngine - iterate purification maps and analyse their fixed points.

A purification map sends the Bell vector F of the input pairs to the
post-selected output

    F'_i = (1/p) sum_{jk} S[i, j, k] F_j F_k            (single selection)
    F'_i = (1/p) sum_{jkl} D[i, j, k, l] F_j F_k F_l    (double selection)

where p is the success probability. The frame exchange is already part
of the tensors, so iterating the map is all a recurrence needs.

F_max is the attractor reached from a nearly perfect channel-shaped
vector. F_min is the unstable crossing of the purification curve
F_in -> F'_0(channel(F_in)) with the diagonal. Trajectories started just
above that crossing can settle on the separable period-2 orbit
(1/2, 0, 0, 1/2) <-> (1/2, 1/2, 0, 0) instead of F_max, so the crossing is
located on the curve rather than by classifying whole trajectories.
"""

import logging
from collections.abc import Sequence
from enum import Enum
from typing import Optional

import numpy as np

from purification.config import Settings
from purification.engines.base import (
    BaseEngine,
    EngineError,
    NeverSucceedsError,
    UnreachableTargetError,
)
from purification.schemas import (
    F_MIX,
    BellVector,
    CurvePoint,
    FixedPointReport,
    NoiseParams,
    NoiseScanPoint,
    PurificationMap,
    Scheme,
    ThresholdPoint,
    WorkingRangeRow,
    YieldReport,
)
from purification.tools.bellalgebra import channel_initial_vector, family_noise
from purification.tools.tensorgen import build_map

logger = logging.getLogger(__name__)

ENGINE_NAME = "DynamicsEngine"

# A fixed point only counts as purified this far above the mixed state.
INSIDE_MARGIN = 1e-3
# Infidelity of the channel-shaped start of the F_max iteration. At p_g = 0
# (1, 0, 0, 0) is fixed for every p_m, so the start must be off that point.
START_INFIDELITY = 1e-4
# Purification-curve samples scanned for the first upward crossing.
CURVE_SAMPLES = 200

# First-order infidelity 1 - F_max per unit p_g (uniform noise, p_m = 0).
# Single selection also lets Z errors carried by the ancilla into the source.
FIRST_ORDER_SLOPES = {Scheme.DOUBLE: 8.0 / 15.0, Scheme.SINGLE: 20.0 / 15.0}


class BoundVariant(str, Enum):
    """Gate orderings of the first-order fidelity bound."""
    A = "A"   # 1 - 2 (p_30 + sum_i p_i0)
    B = "B"   # 1 - 2 (p_10 + sum_i p_i0)


# =============================================================================
# Pure map operations
# =============================================================================

def _flat_tensor(m: PurificationMap) -> np.ndarray:
    array = m.tensor.array
    return array.reshape(4, -1)


def _products(v: np.ndarray, copies: int) -> np.ndarray:
    out = v
    for _ in range(copies - 1):
        out = np.kron(out, v)
    return out


def _step(flat: np.ndarray, copies: int, v: np.ndarray) -> tuple[np.ndarray, float]:
    out = flat @ _products(v, copies)
    p = float(out.sum())
    if p <= 0.0:
        raise NeverSucceedsError(ENGINE_NAME)
    return out / p, p


def apply_map(m: PurificationMap, f: BellVector) -> tuple[BellVector, float]:
    """
    One round of the purification map.

    Returns:
        (normalized output vector, success probability)

    Raises:
        NeverSucceedsError: If post-selection discards every outcome
    """
    out, p = _step(_flat_tensor(m), m.copies_per_round, f.as_array())
    return BellVector.from_array(out), p


def iterate(
    m: PurificationMap,
    f0: BellVector,
    max_rounds: int,
    tol: float = 1e-12,
) -> list[tuple[BellVector, float]]:
    """
    Trajectory F^(n) = A(F^(n-1)) for n = 1..max_rounds.

    Stops early once an iteration moves the vector by less than ``tol``
    in the infinity norm.
    """
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    flat = _flat_tensor(m)
    v = f0.as_array()
    trajectory: list[tuple[BellVector, float]] = []
    for _ in range(max_rounds):
        new, p = _step(flat, m.copies_per_round, v)
        trajectory.append((BellVector.from_array(new), p))
        if np.max(np.abs(new - v)) < tol:
            break
        v = new
    return trajectory


def upper_bound_first_order(noise: NoiseParams, variant: BoundVariant = BoundVariant.A) -> float:
    """
    First-order ceiling on the purified fidelity.

    Variant A: 1 - 2 (p_30 + sum_{i=1..3} p_i0)
    Variant B: 1 - 2 (p_10 + sum_{i=1..3} p_i0)
    """
    undetected = sum(noise.p[i][0] for i in range(1, 4))
    extra = noise.p[3][0] if BoundVariant(variant) is BoundVariant.A else noise.p[1][0]
    return 1.0 - 2.0 * (extra + undetected)


def best_upper_bound(noise: NoiseParams) -> float:
    """The larger of the two first-order bounds."""
    return max(upper_bound_first_order(noise, v) for v in BoundVariant)


def single_double_gap(p_g: float) -> float:
    """
    Gap F_max(double) - F_max(single) = (8/15) p_g from counting the extra
    undetected errors of the final two gates on the source pair.

    The recurrence itself loses more: see recurrence_gap.
    """
    return 8.0 / 15.0 * p_g


def recurrence_gap(p_g: float) -> float:
    """First-order gap of the iterated maps, (20/15 - 8/15) p_g = (4/5) p_g."""
    return (FIRST_ORDER_SLOPES[Scheme.SINGLE] - FIRST_ORDER_SLOPES[Scheme.DOUBLE]) * p_g


# =============================================================================
# Engine
# =============================================================================

class DynamicsEngine(BaseEngine[PurificationMap, FixedPointReport]):
    """
    Fixed points, working ranges and yields of purification maps.

    Tolerances and iteration caps come from Settings; the tensor backend
    ("tensor" or "exact") decides where maps built by the engine come from.

    Example:
        >>> engine = DynamicsEngine()
        >>> m = engine.build_map(Scheme.SINGLE, uniform_noise(0.0))
        >>> round(engine.run(m).f_min, 6)
        0.5
    """

    name: str = ENGINE_NAME

    def __init__(self, settings: Optional[Settings] = None, backend: str = "tensor"):
        super().__init__(settings)
        self.backend = backend

    def build_map(self, scheme: Scheme, noise: NoiseParams) -> PurificationMap:
        return build_map(scheme, noise, self.backend)

    def run(self, request: PurificationMap) -> FixedPointReport:
        return self.fixed_points(request)

    # -------------------------------------------------------------------------
    # Fixed points
    # -------------------------------------------------------------------------

    def _converge(self, m: PurificationMap, v: np.ndarray) -> tuple[np.ndarray, int, bool]:
        flat = _flat_tensor(m)
        for iteration in range(1, self.settings.max_iterations + 1):
            new, _ = _step(flat, m.copies_per_round, v)
            if np.max(np.abs(new - v)) < self.settings.convergence_tol:
                return new, iteration, True
            v = new
        return v, self.settings.max_iterations, False

    @staticmethod
    def _start() -> np.ndarray:
        return channel_initial_vector(1.0 - START_INFIDELITY).as_array()

    def _attractor(self, m: PurificationMap) -> tuple[Optional[np.ndarray], int, bool]:
        """
        Fixed point reached from the nearly perfect start, or None.

        A trajectory that does not settle (the separable period-2 orbit) or
        settles within INSIDE_MARGIN of F_mix has no purified fixed point.
        """
        final, iterations, converged = self._converge(m, self._start())
        if not converged or final[0] <= F_MIX + INSIDE_MARGIN:
            return None, iterations, converged
        return final, iterations, converged

    def has_purified_point(self, m: PurificationMap) -> bool:
        """True when iteration settles on a fixed point above F_mix + 1e-3."""
        final, _, _ = self._attractor(m)
        return final is not None

    def curve_gain(self, m: PurificationMap, f_in: float) -> float:
        """F'_0 - F_in for one round on the channel-shaped input."""
        out, _ = _step(_flat_tensor(m), m.copies_per_round, channel_initial_vector(f_in).as_array())
        return float(out[0]) - f_in

    def curve_crossing(self, m: PurificationMap, upper: float = 1.0) -> Optional[float]:
        """
        Lowest F_in in (F_mix, upper] where the purification curve rises
        above the diagonal, bisected to fidelity_tol.

        Returns None if the curve never gains on the scanned grid.
        """
        grid = np.linspace(F_MIX + INSIDE_MARGIN, upper, CURVE_SAMPLES)
        gains = [self.curve_gain(m, float(f)) for f in grid]
        rising = next((i for i, gain in enumerate(gains) if gain > 0.0), None)
        if rising is None or rising == 0:
            return None
        lo, hi = float(grid[rising - 1]), float(grid[rising])
        while hi - lo > self.settings.fidelity_tol:
            mid = 0.5 * (lo + hi)
            if self.curve_gain(m, mid) > 0.0:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def fixed_points(self, m: PurificationMap, with_fmin: bool = True) -> FixedPointReport:
        """
        Locate F_max (iteration from a nearly perfect channel vector) and
        F_min (upward crossing of the purification curve below F_max).

        A map without a purified fixed point yields a report whose f_max
        and f_min are both None.
        """
        final, iterations, converged = self._attractor(m)
        if not converged:
            logger.warning(
                f"F_max iteration did not converge in {iterations} steps ({m.label})"
            )
        if final is None:
            logger.warning(f"No purified fixed point for {m.scheme.value} ({m.label})")
            return FixedPointReport(scheme=m.scheme, converged=converged, iterations=iterations)

        f_max = BellVector.from_array(final)
        f_min = self.curve_crossing(m, f_max.fidelity) if with_fmin else None
        if f_min is not None and not (f_max.fidelity > f_min > F_MIX):
            logger.warning(
                f"Curve crossing {f_min:.6f} not between F_mix and F_max "
                f"{f_max.fidelity:.6f}; dropping F_min"
            )
            f_min = None
        logger.debug(f"{m.scheme.value}: F_max={f_max.fidelity:.9f} F_min={f_min}")
        return FixedPointReport(
            scheme=m.scheme,
            f_max=f_max,
            f_min=f_min,
            converged=converged,
            iterations=iterations,
        )

    # -------------------------------------------------------------------------
    # Working range
    # -------------------------------------------------------------------------

    def is_inside(self, scheme: Scheme, noise_kind: str, p_g: float, p_m: float) -> bool:
        return self.has_purified_point(self.build_map(scheme, family_noise(noise_kind, p_g, p_m)))

    def threshold_for(
        self,
        scheme: Scheme,
        p_m: float,
        noise_kind: str = "uniform",
        pg_range: tuple[float, float] = (0.0, 0.2),
    ) -> Optional[float]:
        """
        Largest p_g with a purified fixed point at this p_m, bisected to threshold_tol.

        Returns None if even the lower edge is outside, the upper edge if
        it is still inside.
        """
        lo, hi = pg_range
        if not self.is_inside(scheme, noise_kind, lo, p_m):
            return None
        if self.is_inside(scheme, noise_kind, hi, p_m):
            logger.warning(f"{scheme.value} still inside at p_g={hi}, p_m={p_m}")
            return hi
        while hi - lo > self.settings.threshold_tol:
            mid = 0.5 * (lo + hi)
            if self.is_inside(scheme, noise_kind, mid, p_m):
                lo = mid
            else:
                hi = mid
        return lo

    def threshold_curve(
        self,
        scheme: Scheme,
        pm_grid: Sequence[float],
        noise_kind: str = "uniform",
        pg_range: tuple[float, float] = (0.0, 0.2),
    ) -> list[ThresholdPoint]:
        """Threshold p_g for every p_m on the grid."""
        points = []
        for p_m in pm_grid:
            threshold = self.threshold_for(scheme, p_m, noise_kind, pg_range)
            logger.info(f"{scheme.value} p_m={p_m:g}: threshold p_g={threshold}")
            points.append(ThresholdPoint(scheme=scheme, p_m=p_m, p_g_threshold=threshold))
        return points

    def working_range(
        self,
        scheme: Scheme,
        pg_grid: Sequence[float],
        pm_grid: Sequence[float],
        noise_kind: str = "uniform",
    ) -> list[ThresholdPoint]:
        """Threshold curve with p_g bisected inside the span of ``pg_grid``."""
        return self.threshold_curve(
            scheme, pm_grid, noise_kind, pg_range=(min(pg_grid), max(pg_grid))
        )

    def measurement_threshold(self, scheme: Scheme, noise_kind: str = "uniform") -> Optional[float]:
        """Largest p_m with a purified fixed point at p_g = 0."""
        lo, hi = 0.0, 0.5
        if not self.is_inside(scheme, noise_kind, 0.0, lo):
            return None
        if self.is_inside(scheme, noise_kind, 0.0, hi):
            return hi
        while hi - lo > self.settings.threshold_tol:
            mid = 0.5 * (lo + hi)
            if self.is_inside(scheme, noise_kind, 0.0, mid):
                lo = mid
            else:
                hi = mid
        return lo

    def scan_working_range(
        self,
        scheme: Scheme,
        pg_grid: Sequence[float],
        pm_grid: Sequence[float],
        noise_kind: str = "uniform",
        with_fmin: bool = False,
    ) -> list[WorkingRangeRow]:
        """One row per (p_g, p_m) grid point, p_m varying fastest."""
        rows = []
        for p_g in pg_grid:
            for p_m in pm_grid:
                m = self.build_map(scheme, family_noise(noise_kind, p_g, p_m))
                report = self.fixed_points(m, with_fmin=with_fmin)
                rows.append(
                    WorkingRangeRow(
                        p_g=p_g,
                        p_m=p_m,
                        scheme=scheme,
                        f_max=report.f_max.fidelity if report.f_max else None,
                        f_min=report.f_min,
                        inside=report.has_purified_point,
                    )
                )
        return rows

    def fidelity_vs_noise(
        self,
        scheme: Scheme,
        p_grid: Sequence[float],
        noise_kind: str = "uniform",
    ) -> list[NoiseScanPoint]:
        """F_max and F_min along the diagonal p = p_g = p_m."""
        points = []
        for p in p_grid:
            report = self.fixed_points(self.build_map(scheme, family_noise(noise_kind, p, p)))
            points.append(
                NoiseScanPoint(
                    p=p,
                    scheme=scheme,
                    f_max=report.f_max.fidelity if report.f_max else None,
                    f_min=report.f_min,
                    inside=report.has_purified_point,
                )
            )
        return points

    def measure_first_order_slope(self, scheme: Scheme, p_grid: Sequence[float]) -> float:
        """
        Least-squares slope of 1 - F_max against p_g (uniform noise, p_m = 0).

        Raises:
            EngineError: If some grid point has no purified fixed point
        """
        infidelities = []
        for p_g in p_grid:
            report = self.fixed_points(
                self.build_map(scheme, family_noise("uniform", p_g, 0.0)), with_fmin=False
            )
            if report.f_max is None:
                raise EngineError(self.name, f"no purified fixed point at p_g={p_g}")
            infidelities.append(1.0 - report.f_max.fidelity)
        slope, _ = np.polyfit(np.asarray(p_grid, dtype=float), np.asarray(infidelities), 1)
        return float(slope)

    # -------------------------------------------------------------------------
    # Curves and yield
    # -------------------------------------------------------------------------

    def purification_curve(
        self, m: PurificationMap, f_grid: Sequence[float]
    ) -> list[CurvePoint]:
        """One map application for each channel-shaped input F_in."""
        points = []
        for f_in in f_grid:
            out, p = apply_map(m, channel_initial_vector(f_in))
            points.append(CurvePoint(f_in=f_in, f_out=out.fidelity, success_prob=p))
        return points

    def compute_yield(self, m: PurificationMap, target_f: float, f_ch: float) -> YieldReport:
        """
        Rounds and yield needed to lift a channel of fidelity F_ch to target_f.

        Raises:
            UnreachableTargetError: If the trajectory settles below target_f
        """
        flat = _flat_tensor(m)
        v = channel_initial_vector(f_ch).as_array()
        per_round: list[float] = []
        while v[0] < target_f:
            if len(per_round) >= self.settings.max_iterations:
                raise UnreachableTargetError(self.name, target_f, float(v[0]))
            new, p = _step(flat, m.copies_per_round, v)
            per_round.append(p)
            stalled = np.max(np.abs(new - v)) < self.settings.convergence_tol
            v = new
            if stalled and v[0] < target_f:
                raise UnreachableTargetError(self.name, target_f, float(v[0]))

        yield_ = float(np.prod([p / m.copies_per_round for p in per_round]))
        logger.debug(f"{m.scheme.value}: n={len(per_round)} yield={yield_:.6g}")
        return YieldReport(
            scheme=m.scheme,
            target_f=target_f,
            f_ch=f_ch,
            n_rounds=len(per_round),
            yield_=yield_,
            per_round_success=per_round,
            final=BellVector.from_array(v),
        )

    def yield_curve(
        self, m: PurificationMap, f_ch: float, targets: Sequence[float]
    ) -> list[YieldReport]:
        """Yield for each reachable target; unreachable targets are skipped."""
        reports = []
        for target in targets:
            try:
                reports.append(self.compute_yield(m, target, f_ch))
            except UnreachableTargetError as e:
                logger.debug(f"Skipping target {target}: {e}")
        return reports
