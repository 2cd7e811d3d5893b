"""Low-rank recovery through the convex bi-dual of l2-regularized factorization."""

from lrd.certificates import (
    CertificateReport,
    ConditionCheck,
    GolfingConfig,
    GolfingResult,
    build_certificate_golfing_mc,
    build_certificate_ls_mc,
    build_certificate_rpca,
    verify_mc_certificate,
    verify_rpca_certificate,
)
from lrd.errors import IllPosedError, NumericalError, ParseError
from lrd.instances import (
    MCInstance,
    RPCAInstance,
    gen_lowrank,
    gen_sparse_corruption,
    incoherence_mu,
    make_mc_instance,
    make_rpca_instance,
    required_samples_mc,
    sample_bernoulli,
    sample_uniform,
)
from lrd.linalg import (
    SupportSet,
    TangentSpace,
    composed_projector_norm,
    project_omega,
    project_T,
    project_T_perp,
    svd,
    svd_r,
)
from lrd.phase import PhaseGrid, read_csv, run_grid, write_csv
from lrd.rng import Rng, derive_seed
from lrd.rstar import (
    prox_half_r_sq,
    prox_rstar,
    prox_topr_sq_vec,
    rstar_norm,
    rstar_subgradient_check,
)
from lrd.solvers import (
    GapReport,
    SolveReport,
    SolverConfig,
    douglas_rachford,
    duality_gap_mc,
    solve_factored_gd,
    solve_mc_bidual,
    solve_rpca_bidual,
    solve_weighted_lra,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateReport",
    "ConditionCheck",
    "GapReport",
    "GolfingConfig",
    "GolfingResult",
    "IllPosedError",
    "MCInstance",
    "NumericalError",
    "ParseError",
    "PhaseGrid",
    "RPCAInstance",
    "Rng",
    "SolveReport",
    "SolverConfig",
    "SupportSet",
    "TangentSpace",
    "build_certificate_golfing_mc",
    "build_certificate_ls_mc",
    "build_certificate_rpca",
    "composed_projector_norm",
    "derive_seed",
    "douglas_rachford",
    "duality_gap_mc",
    "gen_lowrank",
    "gen_sparse_corruption",
    "incoherence_mu",
    "make_mc_instance",
    "make_rpca_instance",
    "project_T",
    "project_T_perp",
    "project_omega",
    "prox_half_r_sq",
    "prox_rstar",
    "prox_topr_sq_vec",
    "read_csv",
    "required_samples_mc",
    "rstar_norm",
    "rstar_subgradient_check",
    "run_grid",
    "sample_bernoulli",
    "sample_uniform",
    "solve_factored_gd",
    "solve_mc_bidual",
    "solve_rpca_bidual",
    "solve_weighted_lra",
    "svd",
    "svd_r",
    "verify_mc_certificate",
    "verify_rpca_certificate",
    "write_csv",
    "__version__",
]
