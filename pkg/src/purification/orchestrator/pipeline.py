"""
AnalysisPipeline - runs one resolved command end to end.

The orchestrator coordinates the engines without doing numerics itself.
Every command goes through the same three stages:

1. RESOLVE: noise table, map or graph from the RunConfig
2. COMPUTE: one engine call
3. EMIT: CSV or JSON artifact, one-line summary

Failures in stage 1 are configuration errors, failures in stage 2
computation errors; neither escapes as an exception.
"""

import csv
import json
import logging
from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from purification.config import Settings, get_settings
from purification.engines import DynamicsEngine, EngineError, GraphMCEngine
from purification.engines.dynamics import (
    BoundVariant,
    recurrence_gap,
    single_double_gap,
    upper_bound_first_order,
)
from purification.engines.graphmc import multi_upper_bound, validate_graph
from purification.schemas import (
    Command,
    CurvePoint,
    GraphValidationError,
    MCConfig,
    MCNoisePoint,
    MCYieldPoint,
    NoiseParams,
    NoiseScanPoint,
    OutputFormat,
    RunConfig,
    TwoColorableGraph,
    WorkingRangeRow,
    YieldReport,
)
from purification.tools.bellalgebra import family_noise, noise_from_spec
from purification.tools.tensorgen import get_backend, tensor_to_json

logger = logging.getLogger(__name__)

Row = dict[str, Any]


class ConfigError(ValueError):
    """Raised when flags or a config file do not resolve to a valid RunConfig."""


class ErrorKind(str, Enum):
    CONFIG = "config"
    COMPUTATION = "computation"


class RunResult(BaseModel):
    """
    Result of running one command.

    Attributes:
        command: Command that ran (None if the config never resolved)
        config: Resolved configuration
        columns: Table columns
        rows: Table rows written to the artifact
        summary: One-line human summary
        artifacts: Files written
        success: Whether the command completed
        error: Error message if it failed
        error_kind: "config" or "computation"
    """

    command: Optional[Command] = None
    config: Optional[RunConfig] = None
    columns: list[str] = Field(default_factory=list)
    rows: list[Row] = Field(default_factory=list)
    summary: str = ""
    artifacts: list[Path] = Field(default_factory=list)
    success: bool = True
    error: Optional[str] = None
    error_kind: Optional[ErrorKind] = None


def _describe_validation(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        where = ".".join(str(part) for part in err["loc"]) or "config"
        parts.append(f"{where}: {err['msg']}")
    return "; ".join(parts)


def parse_config(flags: dict[str, Any], config_file: Optional[Path] = None) -> RunConfig:
    """
    Merge an optional JSON config file with command-line flags.

    Flags override file values; a flag set to None counts as not given.

    Raises:
        ConfigError: For a missing or malformed file, an unknown key, a
            missing required field or conflicting values
    """
    merged: dict[str, Any] = {}
    if config_file is not None:
        try:
            with open(config_file) as f:
                loaded = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {config_file}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed config file {config_file}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config file {config_file} must hold a JSON object")
        merged.update(loaded)
    merged.update({key: value for key, value in flags.items() if value is not None})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(_describe_validation(e)) from e


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def model_columns(model: type[BaseModel]) -> list[str]:
    """CSV columns of a row model, aliases where set."""
    return [info.alias or name for name, info in model.model_fields.items()]


FIXED_POINT_COLUMNS = [
    "scheme", "p_g", "p_m", "f_max", "f_min", "f_mix",
    "f_max_1", "f_max_2", "f_max_3", "converged", "iterations",
]
YIELD_COLUMNS = ["scheme", "p_g", "p_m", "f_ch", "target_f", "n_rounds", "yield"]
BOUND_COLUMNS = ["variant", "p_g", "f_upper"]
ROUND_COLUMNS = ["round", "samples_in", "accepted", "fidelity", "stderr", "acceptance_rate"]


class Artifact(BaseModel):
    """
    What one handler produces.

    Attributes:
        columns: CSV header, written even when there are no rows
        rows: Table rows keyed by column
        summary: One-line human summary
        payload: Extra JSON content
    """

    columns: list[str]
    rows: list[Row] = Field(default_factory=list)
    summary: str
    payload: dict[str, Any] = Field(default_factory=dict)


def write_csv(path: Path, columns: list[str], rows: list[Row]) -> None:
    """Header row, then one line per row in column order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])


def write_json(path: Path, cfg: RunConfig, payload: dict[str, Any]) -> None:
    """JSON document embedding the resolved RunConfig for provenance."""
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"config": cfg.model_dump(mode="json"), **payload}
    with open(path, "w") as f:
        json.dump(document, f, indent=2, default=_cell)
        f.write("\n")


class AnalysisPipeline:
    """
    Orchestrator for the command-line analyses.

    The orchestrator is NOT numerical - it resolves inputs, calls one
    engine and writes the result. All computation is done by the engines.

    Example:
        >>> pipeline = AnalysisPipeline()
        >>> cfg = parse_config({"command": "bounds", "noise": "uniform:0.03"})
        >>> result = pipeline.run(cfg)
        >>> result.summary
        'F_upper(A) = 0.984, F_upper(B) = 0.984'
    """

    def __init__(self, settings: Optional[Settings] = None, output_dir: Optional[Path] = None):
        self.settings = settings or get_settings()
        self.output_dir = output_dir or self.settings.output_dir
        self._handlers: dict[Command, Callable[[RunConfig], Artifact]] = {
            Command.TENSOR: self._tensor,
            Command.FIXED_POINTS: self._fixed_points,
            Command.PURIFY_CURVE: self._purify_curve,
            Command.WORKING_RANGE: self._working_range,
            Command.YIELD: self._yield,
            Command.BOUNDS: self._bounds,
            Command.MC_GRAPH: self._mc_graph,
        }
        logger.debug(f"AnalysisPipeline initialized (output_dir={self.output_dir})")

    # -------------------------------------------------------------------------
    # Stage 1: resolve
    # -------------------------------------------------------------------------

    def resolve_noise(self, cfg: RunConfig) -> NoiseParams:
        if cfg.p is not None:
            p = cfg.p_grid()[0]
            return family_noise(cfg.noise_kind, p, p)
        pg = None if cfg.pg is None else float(cfg.pg)
        return noise_from_spec(cfg.noise, p_m=cfg.p_m, p_g=pg)

    def resolve_graph(self, cfg: RunConfig) -> TwoColorableGraph:
        path = cfg.graph or self.settings.steane_graph_file
        if not path.exists():
            raise ConfigError(f"Graph file not found: {path}")
        try:
            return TwoColorableGraph.from_file(path)
        except ValidationError as e:
            raise ConfigError(f"Invalid graph file {path}: {_describe_validation(e)}") from e

    def _resolve(self, cfg: RunConfig) -> None:
        """Fail early on inputs that cannot be built."""
        if cfg.command is Command.WORKING_RANGE:
            return
        self.resolve_noise(cfg)
        if cfg.command is Command.MC_GRAPH:
            validate_graph(self.resolve_graph(cfg))

    # -------------------------------------------------------------------------
    # Stage 2: compute, one handler per command
    # -------------------------------------------------------------------------

    def _dynamics(self, cfg: RunConfig) -> DynamicsEngine:
        return DynamicsEngine(self.settings, backend=cfg.engine.value)

    def _tensor(self, cfg: RunConfig) -> Artifact:
        noise = self.resolve_noise(cfg)
        tensor = get_backend(cfg.engine.value)(cfg.scheme, noise)
        array = tensor.array
        axes = ("i", "j", "k", "l")[: array.ndim]
        rows = [
            {**dict(zip(axes, (int(x) for x in index))), "value": float(value)}
            for index, value in zip(np.ndindex(*array.shape), array.ravel())
        ]
        success = tensor.success_by_input()
        summary = (
            f"{cfg.scheme.value} tensor ({cfg.engine.value}): success probability "
            f"{float(success.min()):.6f}..{float(success.max()):.6f}"
        )
        return Artifact(
            columns=[*axes, "value"], rows=rows, summary=summary, payload=tensor_to_json(tensor, noise)
        )

    def _fixed_points(self, cfg: RunConfig) -> Artifact:
        if cfg.p is not None:
            return self._noise_scan(cfg)
        noise = self.resolve_noise(cfg)
        engine = self._dynamics(cfg)
        report = engine.fixed_points(engine.build_map(cfg.scheme, noise))
        vector = report.f_max.f if report.f_max else (None,) * 4
        row = {
            "scheme": cfg.scheme,
            "p_g": noise.scan_p_g,
            "p_m": noise.p_m,
            "f_max": report.f_max.fidelity if report.f_max else None,
            "f_min": report.f_min,
            "f_mix": report.f_mix.fidelity,
            "f_max_1": vector[1],
            "f_max_2": vector[2],
            "f_max_3": vector[3],
            "converged": report.converged,
            "iterations": report.iterations,
        }
        if report.f_max is None:
            summary = f"{cfg.scheme.value}: no purified fixed point (outside the working range)"
        else:
            f_min = "none" if report.f_min is None else f"{report.f_min:.6f}"
            summary = f"F_max = {report.f_max.fidelity:.6f}, F_min = {f_min}"
        return Artifact(
            columns=FIXED_POINT_COLUMNS,
            rows=[row],
            summary=summary,
            payload={"noise": noise.describe(), "report": report.model_dump(mode="json")},
        )

    def _noise_scan(self, cfg: RunConfig) -> Artifact:
        points = self._dynamics(cfg).fidelity_vs_noise(cfg.scheme, cfg.p_grid(), cfg.noise_kind)
        rows = [point.model_dump() for point in points]
        inside = [point.p for point in points if point.inside]
        reach = f"purifies up to p = {max(inside):g}" if inside else "never purifies"
        summary = f"{cfg.scheme.value} {cfg.noise_kind}: {reach} ({len(points)} points)"
        return Artifact(columns=model_columns(NoiseScanPoint), rows=rows, summary=summary, payload={"rows": rows})

    def _purify_curve(self, cfg: RunConfig) -> Artifact:
        noise = self.resolve_noise(cfg)
        engine = self._dynamics(cfg)
        points = engine.purification_curve(engine.build_map(cfg.scheme, noise), cfg.fin_grid())
        rows = [point.model_dump() for point in points]
        gains = sum(1 for point in points if point.f_out > point.f_in)
        summary = f"{cfg.scheme.value}: {len(points)} points, F_out > F_in at {gains}"
        return Artifact(
            columns=model_columns(CurvePoint),
            rows=rows,
            summary=summary,
            payload={"noise": noise.describe(), "rows": rows},
        )

    def _working_range(self, cfg: RunConfig) -> Artifact:
        engine = self._dynamics(cfg)
        scan = engine.scan_working_range(
            cfg.scheme, cfg.pg_grid(), cfg.pm_grid(), cfg.noise_kind, with_fmin=cfg.with_fmin
        )
        rows = [row.model_dump() for row in scan]
        inside = sum(1 for row in scan if row.inside)
        summary = f"{cfg.scheme.value}: inside the working range at {inside} of {len(scan)} points"
        return Artifact(columns=model_columns(WorkingRangeRow), rows=rows, summary=summary, payload={"rows": rows})

    def _yield_row(self, cfg: RunConfig, noise: NoiseParams, report: YieldReport) -> Row:
        return {
            "scheme": cfg.scheme,
            "p_g": noise.scan_p_g,
            "p_m": noise.p_m,
            "f_ch": report.f_ch,
            "target_f": report.target_f,
            "n_rounds": report.n_rounds,
            "yield": report.yield_,
        }

    def _yield(self, cfg: RunConfig) -> Artifact:
        noise = self.resolve_noise(cfg)
        engine = self._dynamics(cfg)
        m = engine.build_map(cfg.scheme, noise)
        assert cfg.fch is not None
        if cfg.targets is not None:
            reports = engine.yield_curve(m, cfg.fch, cfg.target_grid())
            rows = [self._yield_row(cfg, noise, report) for report in reports]
            skipped = len(cfg.target_grid()) - len(reports)
            summary = f"{cfg.scheme.value}: {len(reports)} target(s) reached, {skipped} unreachable"
            return Artifact(
                columns=YIELD_COLUMNS,
                rows=rows,
                summary=summary,
                payload={
                    "noise": noise.describe(),
                    "reports": [report.model_dump(mode="json", by_alias=True) for report in reports],
                },
            )
        assert cfg.target is not None
        report = engine.compute_yield(m, cfg.target, cfg.fch)
        summary = f"{cfg.scheme.value}: n_rounds = {report.n_rounds}, yield = {report.yield_:.6g}"
        return Artifact(
            columns=YIELD_COLUMNS,
            rows=[self._yield_row(cfg, noise, report)],
            summary=summary,
            payload={"noise": noise.describe(), "report": report.model_dump(mode="json", by_alias=True)},
        )

    def _bounds(self, cfg: RunConfig) -> Artifact:
        noise = self.resolve_noise(cfg)
        rows: list[Row] = [
            {"variant": variant, "p_g": noise.scan_p_g, "f_upper": upper_bound_first_order(noise, variant)}
            for variant in BoundVariant
        ]
        summary = ", ".join(f"F_upper({row['variant'].value}) = {row['f_upper']:.6g}" for row in rows)
        payload: dict[str, Any] = {"noise": noise.describe(), "rows": rows}
        if noise.is_uniform():
            payload["single_double_gap"] = single_double_gap(noise.p_g)
            payload["recurrence_gap"] = recurrence_gap(noise.p_g)
        return Artifact(columns=BOUND_COLUMNS, rows=rows, summary=summary, payload=payload)

    def _mc_config(self, cfg: RunConfig, engine: GraphMCEngine) -> MCConfig:
        assert cfg.fch is not None
        return engine.config(
            self.resolve_graph(cfg),
            cfg.scheme,
            self.resolve_noise(cfg),
            cfg.fch,
            rounds=cfg.rounds,
            seed=cfg.seed,
            samples=cfg.samples,
            workers=cfg.workers,
            local_vertices=tuple(cfg.local_vertices),
        )

    def _mc_graph(self, cfg: RunConfig) -> Artifact:
        engine = GraphMCEngine(self.settings)
        mc = self._mc_config(cfg, engine)
        if cfg.p is not None:
            return self._mc_noise_scan(cfg, engine, mc)
        if cfg.targets is not None:
            return self._mc_yield_curve(cfg, engine, mc)

        result = engine.mc_purification(mc)
        rows = [stats.model_dump(include=set(ROUND_COLUMNS)) for stats in result.rounds]
        summary = (
            f"{result.graph_name} {cfg.scheme.value}: F {result.initial_fidelity:.4f} -> "
            f"{result.final_fidelity:.4f} after {cfg.rounds} rounds, "
            f"yield = {result.yield_estimate:.4g}"
        )
        payload: dict[str, Any] = {"result": result.model_dump(mode="json")}
        if mc.noise.is_uniform():
            payload["upper_bound"] = multi_upper_bound(result.n, mc.noise.p_g)
        return Artifact(columns=ROUND_COLUMNS, rows=rows, summary=summary, payload=payload)

    def _mc_noise_scan(self, cfg: RunConfig, engine: GraphMCEngine, mc: MCConfig) -> Artifact:
        points = engine.mc_noise_scan(mc, cfg.p_grid(), cfg.noise_kind)
        rows = [point.model_dump() for point in points]
        inside = [point.p for point in points if point.f_max is not None]
        reach = f"purifies up to p = {max(inside):g}" if inside else "never purifies"
        summary = f"{mc.graph.name} {cfg.scheme.value} from F_ch = {mc.f_ch}: {reach}"
        return Artifact(columns=model_columns(MCNoisePoint), rows=rows, summary=summary, payload={"rows": rows})

    def _mc_yield_curve(self, cfg: RunConfig, engine: GraphMCEngine, mc: MCConfig) -> Artifact:
        targets = cfg.target_grid()
        points = engine.mc_yield_curve(mc, targets)
        rows = [point.model_dump(by_alias=True) for point in points]
        summary = (
            f"{mc.graph.name} {cfg.scheme.value}: {len(points)} of {len(targets)} target(s) "
            f"reached within {cfg.rounds} rounds"
        )
        return Artifact(columns=model_columns(MCYieldPoint), rows=rows, summary=summary, payload={"rows": rows})

    # -------------------------------------------------------------------------
    # Pipeline
    # -------------------------------------------------------------------------

    def output_path(self, cfg: RunConfig) -> Path:
        return cfg.out or cfg.default_output(self.output_dir)

    def run(self, cfg: RunConfig) -> RunResult:
        """
        Run one command and write its artifact.

        Returns:
            RunResult; check ``success`` and ``error_kind``
        """
        logger.info("=" * 80)
        logger.info(f"PIPELINE START: {cfg.command.value}")
        logger.info("=" * 80)
        logger.info(f"Scheme: {cfg.scheme.value}")
        logger.info(f"Noise: {cfg.noise} (pg={cfg.pg}, pm={cfg.pm})")
        logger.info(f"Engine: {cfg.engine.value}")
        logger.info("-" * 80)

        result = RunResult(command=cfg.command, config=cfg)

        # ============================================================
        # Stage 1: Resolve inputs
        # ============================================================
        logger.info("STAGE 1: RESOLVE INPUTS")
        try:
            self._resolve(cfg)
        except (ValueError, ValidationError) as e:
            return self._fail(result, ErrorKind.CONFIG, e)

        # ============================================================
        # Stage 2: Compute
        # ============================================================
        logger.info("STAGE 2: COMPUTE")
        try:
            artifact = self._handlers[cfg.command](cfg)
        except (ConfigError, GraphValidationError) as e:
            return self._fail(result, ErrorKind.CONFIG, e)
        except (EngineError, ValueError, ArithmeticError) as e:
            return self._fail(result, ErrorKind.COMPUTATION, e)
        result.columns = artifact.columns
        result.rows = artifact.rows
        result.summary = summary = artifact.summary
        logger.info(f"OUTPUT: {len(artifact.rows)} row(s)")

        # ============================================================
        # Stage 3: Emit artifact
        # ============================================================
        logger.info("STAGE 3: EMIT")
        path = self.output_path(cfg)
        try:
            if cfg.format is OutputFormat.CSV:
                write_csv(path, artifact.columns, artifact.rows)
            else:
                write_json(path, cfg, {"summary": summary, **artifact.payload})
        except OSError as e:
            return self._fail(result, ErrorKind.CONFIG, e)
        result.artifacts.append(path)

        logger.info("=" * 80)
        logger.info("PIPELINE COMPLETE - SUMMARY")
        logger.info("=" * 80)
        logger.info(f"  {summary}")
        logger.info(f"  Artifact: {path}")
        logger.info("  Status: SUCCESS")
        logger.info("=" * 80)
        return result

    def _fail(self, result: RunResult, kind: ErrorKind, error: Exception) -> RunResult:
        logger.error(f"Pipeline failed ({kind.value}): {error}")
        result.success = False
        result.error = str(error)
        result.error_kind = kind
        logger.info("=" * 80)
        logger.info("PIPELINE FAILED")
        logger.info("=" * 80)
        return result


def run_command(
    flags: dict[str, Any],
    config_file: Optional[Path] = None,
    settings: Optional[Settings] = None,
) -> RunResult:
    """
    Parse flags (and an optional config file) and run the command.

    Configuration problems come back as a failed RunResult with
    ``error_kind == "config"``.
    """
    try:
        cfg = parse_config(flags, config_file)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return RunResult(success=False, error=str(e), error_kind=ErrorKind.CONFIG)
    return AnalysisPipeline(settings).run(cfg)
