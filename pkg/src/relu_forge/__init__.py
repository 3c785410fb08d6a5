"""Explicit ReLU network construction with certified sup-norm error bounds."""

from .builders import (
    AnalyticBuild,
    BoundCertificate,
    PolySpec,
    SeriesSpec,
    build_analytic,
    build_monomial,
    build_multiply,
    build_polynomial,
    build_square,
    expand_multi_index,
    monomial_count,
    multi_index_degree,
    preset_series,
    theorem_depth,
)
from .calculus import (
    add,
    compose,
    count_params,
    count_params_standard,
    pad_width,
    sigmoidal_to_relu,
    skip_to_standard,
    substitute_inputs,
    wide_to_deep,
)
from .errors import (
    ConversionError,
    DocumentError,
    DocumentInvariantError,
    DocumentParseError,
    DocumentVersionError,
    InputError,
    NoFreeChannelError,
    ParameterError,
    ReluForgeError,
    SeriesTruncationError,
    StructuralError,
)
from .nets import (
    Box,
    IntervalReport,
    ShallowNet,
    SkipNet,
    StandardNet,
    affine_net,
    eval_shallow,
    eval_shallow_batch,
    eval_skip,
    eval_skip_batch,
    eval_standard,
    eval_standard_batch,
    evaluate,
    evaluate_batch,
    interval_bounds,
    validate,
)
from .serialize import deserialize_net, serialize_net
from .verify import (
    DyadicMidpoints,
    EquivalenceReport,
    ErrorReport,
    RandomPoints,
    SweepRow,
    Uniform,
    analytic_rate_bound,
    convergence_sweep,
    equivalence_check,
    strategy_points,
    sup_error,
    sweep_csv,
    theoretical_bound,
)

__version__ = "0.1.0"
