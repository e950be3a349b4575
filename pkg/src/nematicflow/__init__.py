"""Pseudo-spectral toolkit for a periodic liquid-crystal flow model.

The package bundles a spectral representation of fields on the flat
two-dimensional torus, a dyadic (Littlewood-Paley) frequency toolkit, an
energy-dissipating time stepper for a coupled velocity/director system,
two-trajectory uniqueness diagnostics, an Osgood-type comparison module,
and statistical verifiers for the supporting functional inequalities.
"""

from .configio import (
    ConfigError,
    ExperimentConfig,
    InitialSpec,
    TwinSpec,
    VerifySpec,
    parse_config,
)
from .diagnostics import (
    EnergyRecord,
    UniquenessRecord,
    elastic_energy,
    energy_record,
    f_bound,
    frak_d,
    frak_d_components,
    kinetic_energy,
    phi,
    recover_pressure,
    total_dissipation,
    total_energy,
    uniqueness_record,
)
from .dyadic import (
    DyadicError,
    DyadicPartition,
    besov_norm,
    bony_block_decompose,
    bony_split,
    commutator_block,
    commutator_lowpass,
    delta_q,
    hs_inner,
    hs_norm,
    hs_norm_vector,
    s_q,
)
from .dynamics import (
    CoefficientError,
    DivergenceError,
    LeslieCoefficients,
    SolverConfig,
    State,
    ericksen_stress,
    gl_force,
    gl_gradient,
    iterate,
    leslie_stress,
    rhs,
    run,
    step,
    strain_and_vorticity,
)
from .experiments import (
    decompose_experiment,
    make_initial_state,
    run_experiment,
    twin_experiment,
    verify_experiment,
)
from .fields import (
    constant_vector,
    focused_scalar,
    focused_vector,
    generate_initial,
    perturb,
    random_scalar,
    random_vector,
)
from .grid import (
    GridError,
    GridSpec,
    SpectralField,
    TensorField22,
    VectorField2,
    derivative,
    divergence,
    divergence_residual,
    gradient,
    hs_norm_fourier,
    inner,
    integral,
    invert_laplacian,
    jacobian,
    l2_norm,
    laplacian,
    leray_project,
    lp_norm,
    multiply,
    product,
    tensor_divergence,
    to_physical,
    transform,
    vector_hs_norm_fourier,
    vector_l2_norm,
)
from .harness import (
    ALL_CHECKS,
    EnsembleSpec,
    HarnessError,
    RatioReport,
    run_all,
    verify_bernstein,
    verify_cancellation,
    verify_commutator,
    verify_product_rule,
    verify_skew_symmetry,
    verify_sn_linf,
    verify_sobolev_sqrtp,
    verify_tail_bounds,
)
from .osgood import (
    OsgoodError,
    OsgoodTrace,
    check_master_inequality,
    comparison_ode,
    mu,
    mu_control,
    osgood_divergence_certificate,
    osgood_integral,
)
from .snapshots import (
    SnapshotFormatError,
    SnapshotSizeError,
    load,
    persist,
    read_snapshot,
    write_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CHECKS",
    "CoefficientError",
    "ConfigError",
    "DivergenceError",
    "DyadicError",
    "DyadicPartition",
    "EnergyRecord",
    "EnsembleSpec",
    "ExperimentConfig",
    "GridError",
    "GridSpec",
    "HarnessError",
    "InitialSpec",
    "LeslieCoefficients",
    "OsgoodError",
    "OsgoodTrace",
    "RatioReport",
    "SnapshotFormatError",
    "SnapshotSizeError",
    "SolverConfig",
    "SpectralField",
    "State",
    "TensorField22",
    "TwinSpec",
    "UniquenessRecord",
    "VectorField2",
    "VerifySpec",
    "besov_norm",
    "bony_block_decompose",
    "bony_split",
    "check_master_inequality",
    "commutator_block",
    "commutator_lowpass",
    "comparison_ode",
    "constant_vector",
    "decompose_experiment",
    "delta_q",
    "derivative",
    "divergence",
    "divergence_residual",
    "elastic_energy",
    "energy_record",
    "ericksen_stress",
    "f_bound",
    "focused_scalar",
    "focused_vector",
    "frak_d",
    "frak_d_components",
    "generate_initial",
    "gl_force",
    "gl_gradient",
    "gradient",
    "hs_inner",
    "hs_norm",
    "hs_norm_fourier",
    "hs_norm_vector",
    "inner",
    "integral",
    "invert_laplacian",
    "iterate",
    "jacobian",
    "kinetic_energy",
    "l2_norm",
    "laplacian",
    "leray_project",
    "leslie_stress",
    "load",
    "lp_norm",
    "make_initial_state",
    "mu",
    "mu_control",
    "multiply",
    "osgood_divergence_certificate",
    "osgood_integral",
    "parse_config",
    "persist",
    "perturb",
    "phi",
    "product",
    "random_scalar",
    "random_vector",
    "read_snapshot",
    "recover_pressure",
    "rhs",
    "run",
    "run_all",
    "run_experiment",
    "s_q",
    "step",
    "strain_and_vorticity",
    "tensor_divergence",
    "to_physical",
    "total_dissipation",
    "total_energy",
    "transform",
    "twin_experiment",
    "uniqueness_record",
    "vector_hs_norm_fourier",
    "vector_l2_norm",
    "verify_bernstein",
    "verify_cancellation",
    "verify_commutator",
    "verify_experiment",
    "verify_product_rule",
    "verify_skew_symmetry",
    "verify_sn_linf",
    "verify_sobolev_sqrtp",
    "verify_tail_bounds",
    "write_snapshot",
]
