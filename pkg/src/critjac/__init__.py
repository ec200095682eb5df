"""Asymptotics and discrete spectrum of Jacobi matrices b_n = n^alpha c_n, q_n = n^alpha
on the critical boundary |c1 - c2| = 1."""

from .errors import (
    AdmissibilityError,
    CapExceededError,
    CritJacError,
    NumericalError,
    ParameterError,
    SingularStepError,
)
from .family import (
    CarlemanReport,
    JacobiFamily,
    PhaseRegion,
    PhaseTag,
    SpectralWindow,
    carleman_check,
    diagonal,
    entries,
    phase_classify,
    weight,
)
from .signedlog import SignedLogSeq, SignedLogValue
from .recurrence import (
    first_kind_polynomials,
    initial_condition_residual,
    recurrence_backward,
    recurrence_forward,
    recurrence_residual,
)
from .poincare import (
    min_index_N,
    poincare_coeffs,
    poincare_F,
    poincare_G,
    poincare_solve,
    reconstruct_f_from_x,
    split_xy,
    verify_poincare,
)
from .expansions import (
    AsymptoticExpansion,
    F_expansion,
    G_expansion,
    beta_expansion,
    residual_slope,
)
from .riccati import RiccatiSolution, X_to_x, beta, phi, rectifier_residual, riccati_residual, x_to_X
from .kelley import (
    BoundParams,
    EnvelopePair,
    TrappingReport,
    backward_limit,
    decaying_riccati,
    envelopes,
    growing_riccati,
    verify_trapping,
)
from .spectrum import (
    EigenpairEstimate,
    TruncationSpectrum,
    decay_rate_fit,
    eigenvalue_refine,
    proportionality,
    shooting_mismatch,
    spacing_report,
    sturm_count,
    truncate_eigenvalues,
)
from .config import RunConfig

__version__ = "0.1.0"
