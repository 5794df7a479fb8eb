"""Packing smooth families of surfaces into a Lebesgue-null set, at desk scale."""

__version__ = "0.1.0"

from .codec import FactorialDigits, agreement_depth, expand, tail_bound, value
from .dense import (
    BoundedModeRequired,
    DenseMapFamily,
    DenseMapIndex,
    GridSpec,
    SequencePosition,
    TupleIndex,
    grid_points,
)
from .family import (
    FamilyBounds,
    FamilySpec,
    make_demo,
    right_inverse,
    sawyer_line,
    sawyer_parabola,
    target_matrix,
    twist_pair,
    validate,
)
from .measure import (
    CoverEstimate,
    decay_report,
    prefix_grid,
    slice_image_cover,
    union_measure_estimate,
)
from .numeric import LogMagnitude, log_factorial, loglog
from .psi import (
    PsiTruncation,
    periodize,
    psi_bound,
    psi_tail_constant,
    psi_tail_radius,
    psi_truncated,
)
from .slices import (
    SliceCertificate,
    choose_index,
    covering_certificate,
    decompose,
    select_k,
    term_bounds,
    verify_term_domination,
)
