"""Topological index pairings computed as half-signatures of spectral localizers."""

from .clifford import CliffordRep, build_clifford, verify_clifford
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    LocalizerError,
    NotInvertibleError,
    OddSignatureError,
    SymmetryError,
)
from .lattice import LatticeBall, build_ball, dirac_matrix
from .localizer import (
    LocalizerMatrix,
    TaperingPair,
    build_localizer,
    build_tapered_localizer,
    gap_check,
    haagerup_profile,
    homotopy_localizer,
    min_abs_eigenvalue,
)
from .operators import (
    ConditionReport,
    HoppingOperator,
    commutator_with_position,
    condition_report,
    dirac_commutator_norm,
    norm_and_gap,
    restrict,
)
from .models import (
    MODELS,
    ModelSpec,
    build_model,
    chiral_3d_model,
    defect_shift_model,
    diii_chain_model,
    shift_model,
    ssh_model,
)
from .oracle import (
    BlochSymbol,
    eta_partial_sum,
    odd_chern_d3,
    perturbation_index,
    spectral_flow,
    winding_number_d1,
)
from .signature import Inertia, half_signature, inertia, pfaffian, pfaffian_sign
from .symmetry import (
    InvariantResult,
    RealSymmetryData,
    build_R,
    classify,
    invariant_from_localizer,
    verify_symmetry,
    z2_invariant,
)

__version__ = "0.1.0"
