"""Harish-Chandra series and hyperoctahedral wave functions for the
Calogero-Sutherland (bc), boundary Toda (t) and Morse Calogero-Sutherland (cs)
Hamiltonians, with their difference equations and confluent limits."""

from .core import (
    DEFAULT_TOL, Couplings, Family, Root, SignedPermutation, Tolerances, act, dominance_geq,
    enumerate_level, hyperoctahedral_group, is_regular, is_regular_plus, level, rho, rho_L, rho_M,
    root_system,
)
from .errors import (
    ChamberViolation, ExtrapolationDivergence, HyperwaveError, NearSingularSpectral, PoleOfGamma,
    RationalPole, SpectralPlaneSingularity,
)
from .hcseries import (
    CoeffTable, SeriesValue, asymptotics_gap, build_table, read_table, recurrence_coeff, series_eval,
    write_table,
)
from .special import (
    CFunctionValue, c_factor, c_function, confluence_prefactor, gamma, log_gamma, weight_and_rho,
)
from .wavefn import RegularValue, orbit_terms, wavefunction, wavefunction_regular
from .operators import apply_L_to_series, eigen_residual, potential
from .bispectral import (
    E_eigenvalue, SignedIndexSet, U_coeff, V_coeff, difference_check, difference_residual, v_factor,
    w_factor,
)
from .confluence import (
    coupling_path, series_confluence_error, wavefunction_confluence_error,
)

__version__ = "0.1.0"
