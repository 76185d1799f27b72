"""Transport of moment problems along space-filling curves.

Measures on a box in R^n are pushed through the right inverse of an explicit
Hilbert curve to the parameter interval, where the truncated Hausdorff moment
problem is certified and solved, and pulled back through the curve.
"""

from .curves import (
    AnnularCurve,
    Box,
    HilbertCurve,
    RightInverse,
    SegmentedCurve,
    build_annular,
    build_hilbert,
    build_segmented,
    evaluate,
    right_inverse,
)
from .errors import (
    CompositionError,
    ConfigurationError,
    DomainError,
    InputError,
    InternalConsistencyError,
    MomentTransformError,
    PipelineError,
    PreconditionError,
    ReconstructionError,
)
from .hausdorff import (
    AtomicReconstruction,
    HausdorffCertificate,
    check_hausdorff,
    lebesgue_sequence,
    reconstruct,
    stieltjes_check,
)
from .measures import (
    GridDensity,
    Map,
    Measure,
    MomentSequence,
    cdf_and_quantile,
    decompose_atoms,
    integrate,
    lebesgue_rohlin_normal_form,
    moments,
    pushforward,
)
from .numerics import Polynomial
from .transforms import (
    GEpsApprox,
    TransformReport,
    approximate_g,
    compose,
    full_support_curve,
    g_moment_pipeline,
    lebesgue_direction,
    lift_from_unit,
    rn_transform,
    transform_to_unit,
)
