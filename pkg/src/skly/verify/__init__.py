"""Named numerical checks; each returns a report with a residual and a verdict."""
from .report import (
    ConstraintViolated,
    DegenerateEta,
    PoleCollision,
    VerificationReport,
    combine,
)
from .sklyanin import (
    SklyaninTypeReport,
    check_antiautomorphisms,
    check_constants_in_V2,
    check_eta_quasiperiodicity,
    check_H_holomorphy,
    check_invariant_spaces,
    check_sklyanin_relations,
    check_sklyanin_type,
    check_structure_constants_elliptic,
)
from .kernels import (
    check_ar2_equals_vandiejen,
    check_commutativity,
    check_kernel_identity_corollary,
    check_kernel_identity_D,
    check_kernel_identity_R,
    check_van_diejen_type,
)
from .appendix import (
    RankAmbiguous,
    check_appendix_B_suite,
    check_b_relations_half,
    check_casimirs,
    check_dimension_counts,
)
from .specfun_checks import check_special_functions
