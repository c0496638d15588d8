"""dworklab: exact p-adic arithmetic, Hasse-Witt matrices, Dwork-type
congruence verifiers and p-adic KZ solution frames."""

from .errors import (
    ConfigError,
    CtxMismatch,
    DegenerateTuple,
    DworkLabError,
    IndexOutOfRange,
    NonUnitAtNegativeExponent,
    NonUnitDifference,
    NotAdmissible,
    NotAUnit,
    NotDivisible,
    NotFactored,
    NotPrime,
    OddPrimeRequired,
    OutsideDomain,
    PrecisionTooLow,
    SearchExhausted,
    SingularModP,
    SizeCapExceeded,
    TooLarge,
    UnsupportedArity,
    ZeroPolynomial,
)
from .padic import PadicCtx, ctx_new, teichmueller, unit_inverse, valuation
from .laurent import (
    LaurentPoly,
    TBox,
    coeff_t,
    eval_z,
    frobenius_sub,
    leading_term_lex,
    newton_box,
    partial_z,
    poly_mul,
    poly_pow,
    synth_div_linear,
)
from .ghosts import (
    AdmissibilityCertificate,
    AdmissibleTuple,
    GhostSeq,
    big_product,
    check_admissible,
    ghost_sequence,
)
from .hasse_witt import (
    HWMatrix,
    hw_derivative_at,
    hw_det,
    hw_inverse_at,
    hw_matrix,
    hw_matrix_at,
)
from .dwork import (
    CongruenceReport,
    verify_decomposition,
    verify_derivative_congruence,
    verify_det_congruence,
    verify_dwork_ratio,
    verify_frobenius_factorization,
    verify_second_derivative_congruence,
)
from .kz import (
    KZConfig,
    SolutionMatrix,
    gaudin,
    kz_residual,
    kz_tuple,
    master_polynomial,
    ps_solutions,
    verify_phi_identities,
    verify_solution_congruence,
)
from .limits import (
    Certificate,
    DomainPoint,
    LimitReport,
    ScanResult,
    limit_A,
    limit_I,
    limit_report,
    lift_point,
    rank_check,
    sample_domain_points,
    scan_domain,
    verify_invariance,
    verify_kz_mc,
)

__version__ = "0.1.0"
