"""Numerical continuation toolkit for 1-D superlinear indefinite problems.

Computes global bifurcation diagrams of positive solutions of

    -u'' = lam*u + a(x)*u^2 on (0,1),  u(0) = u(1) = 0,

for sign-changing weights a(x), with fold/branch-point detection, Morse
indices, bump-type classification, local bifurcation directions, and a
parabolic evolution engine for subsolution-seeded steady states.
"""
from .discretization import (
    Grid,
    MuSinDescriptor,
    SinDescriptor,
    Weight,
    build_grid,
    descriptor_from_dict,
    descriptor_from_spec,
    dirichlet_eigenvalues,
    exact_dirichlet_eigenvalue,
    neg_laplacian,
    sample_weight,
)
from .nonlinear import (
    NewtonConfig,
    NoConvergenceError,
    SingularJacobianError,
    SolutionPoint,
    boundary_derivative,
    jacobian,
    newton_solve,
    residual,
)
from .spectral import (
    AmbiguousTypeError,
    BifurcationDirection,
    BumpCode,
    NearDegenerateWarning,
    bifurcation_direction_d1,
    bifurcation_direction_d2,
    classify_type,
    compute_w1,
    local_direction,
    morse_index,
)
from .parabolic import (
    BlowUpError,
    EvolveConfig,
    EvolutionState,
    SubsolutionSpec,
    build_subsolution,
    check_monotone,
    decay_profile,
    evolve_to_steady,
    make_subsolution,
    single_bump_steady,
)
from .continuation import (
    Branch,
    BranchPointEvent,
    BranchStalledError,
    ContinuationConfig,
    FromZero,
    Seeded,
    Switched,
    Trivial,
    arclength_step,
    branch_switch,
    detect_events,
    extended_tangent,
    seed_multibump,
    trace_branch,
)
from .tridiag import TridiagonalSym

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
