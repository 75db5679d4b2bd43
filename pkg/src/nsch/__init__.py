"""Pseudo-spectral solver for a two-phase flow model with chemotaxis.

A Cahn-Hilliard phase field with a regularized logarithmic potential is
coupled to Navier-Stokes transport and to a chemical concentration with
cross diffusion and logistic degradation.  The package provides the
regularized potential family, spectral operators on the torus and the
Neumann rectangle, initial-data preparation, IMEX time stepping, and the
diagnostics that certify the energy law, mass dynamics, sign preservation,
and coercivity along a run.
"""

from .diagnostics import (DiagnosticsRecord, coercivity_floor,
                          coercivity_margin, dissipation_and_remainder,
                          energy, energy_law_residual, make_record,
                          mass_envelope, mass_monitor,
                          pointwise_negativity_check, sigma_monitor,
                          uniqueness_metric)
from .dynamics import (ModelParams, State, beta_cutoff, compute_mu, mobility,
                       rhs_phi, rhs_sigma, rhs_v, sigma_form_divergence,
                       viscosity)
from .exceptions import (CoercivityError, ConfigError, DataError, DomainError,
                         DivergenceError, IoError, NschError,
                         PreconditionError, SingularityError, StabilityError,
                         UnsupportedModeError)
from .initial import (InitialData, elliptic_smooth_phi0, galerkin_truncate,
                      generate_phi0, generate_sigma0, generate_v0,
                      mollify_sigma0, prepare_initial_data)
from .potential import (PotentialParams, QuarticPotential, RegPotential,
                        SingularPotential, find_r_star, psi0, psi0_prime,
                        psi0_second, psi_quartic, psi_singular, young_f,
                        young_g, young_gap)
from .config import DEFAULTS, RunConfig, load_config, parse_config_text
from .output import (DiagnosticsWriter, SnapshotMeta, read_diagnostics_csv,
                     read_snapshot, state_fields, state_from_snapshot,
                     write_diagnostics_csv, write_snapshot)
from .spectral import (Grid, ScalarField, VectorField, dealias, diff_ops,
                       inv_laplacian_zero_mean, leray_project, norms)
from .stepping import SchemeConfig, Stepper, run, twin_run

__version__ = "0.1.0"

__all__ = [
    "PotentialParams", "RegPotential", "SingularPotential", "QuarticPotential",
    "psi_singular", "psi0", "psi0_prime", "psi0_second", "psi_quartic",
    "young_f", "young_g", "young_gap", "find_r_star",
    "Grid", "ScalarField", "VectorField", "diff_ops", "dealias",
    "inv_laplacian_zero_mean", "leray_project", "norms",
    "InitialData", "elliptic_smooth_phi0", "mollify_sigma0",
    "galerkin_truncate", "prepare_initial_data", "generate_phi0",
    "generate_sigma0", "generate_v0",
    "ModelParams", "State", "compute_mu", "rhs_phi", "rhs_sigma", "rhs_v",
    "sigma_form_divergence", "viscosity", "mobility", "beta_cutoff",
    "SchemeConfig", "Stepper", "run", "twin_run",
    "DiagnosticsRecord", "energy", "dissipation_and_remainder",
    "energy_law_residual", "mass_envelope", "mass_monitor", "sigma_monitor",
    "coercivity_margin", "coercivity_floor", "pointwise_negativity_check",
    "uniqueness_metric",
    "make_record",
    "RunConfig", "load_config", "parse_config_text", "DEFAULTS",
    "DiagnosticsWriter", "write_diagnostics_csv", "read_diagnostics_csv",
    "write_snapshot", "read_snapshot", "state_from_snapshot",
    "state_fields", "SnapshotMeta",
    "NschError", "ConfigError", "DomainError", "SingularityError",
    "UnsupportedModeError", "PreconditionError", "DataError", "IoError",
    "CoercivityError", "DivergenceError", "StabilityError",
]
