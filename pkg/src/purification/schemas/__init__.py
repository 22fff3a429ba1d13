"""
Pydantic schemas for the purification toolkit.

These models define the data flowing between tools, engines and the CLI:
- BellVector / PauliPermutation: Bell-diagonal states and label maps
- NoiseParams / ChannelParams: local-operation and channel noise
- SingleTensor / DoubleTensor / PurificationMap: transition tensors
- DensityMatrix: states of the exact simulator
- FixedPointReport / YieldReport / ...: dynamics results
- TwoColorableGraph / MCConfig / MCResult: multipartite Monte Carlo
- RunConfig: resolved command configuration
"""

from purification.schemas.bell import (
    LABEL_BITS,
    PROBABILITY_TOL,
    BellVector,
    PauliPermutation,
    label_from_bits,
)
from purification.schemas.density import DensityMatrix
from purification.schemas.graph import (
    Color,
    GraphValidationError,
    LabelState,
    MCConfig,
    MCNoisePoint,
    MCResult,
    MCYieldPoint,
    RoundStats,
    TwoColorableGraph,
)
from purification.schemas.noise import ChannelParams, NoiseParams
from purification.schemas.reports import (
    F_MIX,
    CurvePoint,
    FixedPointReport,
    NoiseScanPoint,
    ThresholdPoint,
    WorkingRangeRow,
    YieldReport,
)
from purification.schemas.run_config import (
    Backend,
    Command,
    OutputFormat,
    RunConfig,
    parse_grid,
)
from purification.schemas.tensors import (
    DoubleTensor,
    ElementaryTensors,
    PurificationMap,
    Scheme,
    SingleTensor,
    TransitionTensor,
)

__all__ = [
    "LABEL_BITS",
    "PROBABILITY_TOL",
    "BellVector",
    "PauliPermutation",
    "label_from_bits",
    "DensityMatrix",
    "Color",
    "GraphValidationError",
    "LabelState",
    "MCConfig",
    "MCNoisePoint",
    "MCResult",
    "MCYieldPoint",
    "RoundStats",
    "TwoColorableGraph",
    "ChannelParams",
    "NoiseParams",
    "F_MIX",
    "CurvePoint",
    "FixedPointReport",
    "NoiseScanPoint",
    "ThresholdPoint",
    "WorkingRangeRow",
    "YieldReport",
    "Backend",
    "Command",
    "OutputFormat",
    "RunConfig",
    "parse_grid",
    "DoubleTensor",
    "ElementaryTensors",
    "PurificationMap",
    "Scheme",
    "SingleTensor",
    "TransitionTensor",
]
