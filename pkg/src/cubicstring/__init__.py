"""Forward and inverse spectral problems for i D^3 on [0, l] with a rank-one
non-local potential alpha <., v> v."""
from .gtrig import ZETA, GTrigTriple, Sector, eval_gtrig, euler_exp, gtrig_zero, gtrig_zeros
from .inverse import (
    AdmissibilityReport,
    InverseResult,
    SpectrumFile,
    check_admissibility,
    fourier_g,
    hadamard_char0,
    recover_c,
    recover_masses,
    recover_potential,
)
from .quadrature import Grid, GridFunction, make_grid
from .rankone import (
    RankOneSystem,
    SecularRoot,
    dense_oracle,
    perturbed_eigvec,
    rankone_resolvent,
    secular_Q,
    secular_roots,
)
from .spectral_l0 import (
    L0Config,
    L0Eigenpair,
    PoleError,
    char0,
    l0_eigenfunction,
    l0_levels,
    l0_resolvent,
    l0_spectrum,
)
from .transforms import (
    Potential,
    char_alpha,
    fourier_csd,
    l0_coefficients,
    m_fn,
    perturbed_eigenfunction,
)

__version__ = "0.1.0"
