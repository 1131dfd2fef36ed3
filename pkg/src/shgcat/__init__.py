"""Exact and dispersive-limit dynamics of second-harmonic generation."""

from .exceptions import (
    ConfigError,
    DegenerateGap,
    NoConvergence,
    NotSymmetric,
    SectorMismatch,
)
from .fock import (
    BlockedState,
    ModeAmplitudes,
    SectorBasis,
    SingleModeDensity,
    choose_cutoffs,
    coherent_amplitudes,
    embed_product_state,
    sector_basis,
)
from .hamiltonian import (
    EffectiveForm,
    TridiagonalBlock,
    build_sector_block,
    effective_sector_diagonal,
    second_order_pt_diagonal,
    small_rotation_transform,
)
from .linalg import EigenDecomposition, dense_eigen, tridiag_eigen
from .evolution import (
    SpectralPropagator,
    analytic_rho_a,
    evolve_effective,
    evolve_exact,
    kerr_propagate,
)
from .observables import (
    GridSpec,
    QGrid,
    VarianceParams,
    best_cat_fidelity,
    cat_state,
    fidelity,
    find_peaks,
    mean_photons,
    min_quadrature_variance,
    purity,
    q_function,
    quadrature_variance,
    reduce_mode_a,
    variance_formula,
)

__version__ = "0.1.0"
