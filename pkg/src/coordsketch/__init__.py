"""Coordinated-sampling sketches for approximate matrix products and
sketched least-squares regression, with linear-sketch baselines."""

__version__ = "0.1.0"

from ._backend import available_backends, backend_name, use_backend, using_backend
from .errors import (
    CoordinationError,
    DimensionError,
    MatrixParseError,
    ParameterError,
    SketchError,
    SketchFormatError,
)
from .experiments import (
    ExperimentRecord,
    RegressionInstance,
    SynthSpec,
    gen_regression_instance,
    gen_synthetic,
    product_error,
    regression_error,
    run_sweep,
)
from .hashing import SeededHash, derive_seed, hash_unit, hash_units
from .linear import LinearSketch, linear_estimate, linear_items, linear_sketch
from .matrix import SparseMatrix, exact_product, frob_sq_norm, row_sq_norm, row_sq_norms
from .regression import (
    LeverageScores,
    RegressionSketch,
    least_squares,
    leverage_scores,
    regression_residual,
    sketch_matrix_for_regression,
    sketch_vector_for_regression,
    solve_regression,
)
from .sampling import (
    SampleSketch,
    estimate_product,
    intersect,
    priority_sample,
    sketch_items,
    threshold_sample,
)
