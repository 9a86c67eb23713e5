"""Traveling wave fronts of discrete diffusion systems.

A numerical laboratory for cooperative lattice reaction-diffusion systems:
structural hypothesis audits, characteristic-root analysis and threshold
speeds, monotone-iteration front solving, Cauchy evolution with the exact
unit-shift coupling, and weighted-energy stability monitors.
"""

__version__ = "0.1.0"

from .errors import (BlowUpError, BracketError, ConfigError,
                     ConstructionError, DomainError, FrameShiftError,
                     LatticeFrontsError, MonotonicityError,
                     NonConvergenceError, ParameterError)
from .grids import ProfileGrid
from .model import (EpidemicForm, HypothesisReport, HypothesisVerdict,
                    JacobianData, ReactionSystem, Witness, audit_hypotheses,
                    equilibrium_residual, make_holling2_model,
                    make_ricker_model)
from .spectral import (CharParams, SpectralReport, Weight, build_weight,
                       char_matrix, check_sign_determinants,
                       compute_c_star, compute_c_star_lower,
                       compute_spectral_report, eval_char_poly, eval_f_i,
                       find_lambda_bar, find_positive_roots,
                       kernel_eigenvector, positive_vector,
                       select_weight_params)
from .profile import (BoundaryVerdict, SuperSubPair, WaveProfile,
                      balanced_shift, build_subsolution, build_supersolution,
                      build_supersub_pair, check_boundary_limits,
                      load_profile, monotone_iterate, profile_residual,
                      save_profile, shift_laplacian, solve_profile,
                      stable_decay_exponent, truncation_study)
from .evolve import (ClipAudit, EvolveConfig, EvolveResult, FieldState,
                     Perturbation, comparison_harness, discrete_laplacian,
                     evolution_grid, front_on_grid, integrate,
                     load_snapshots_binary, load_snapshots_text,
                     make_initial_data, save_snapshots_binary,
                     save_snapshots_text, split_initial_data,
                     stable_dt_bound, step, validate_config)
from .stability import (DecayFit, NormSample, NormTrace, PerturbationField,
                        build_trace, energy_functional, fit_decay_rate,
                        moving_frame_deviation, perturbation_norms,
                        reference_deviation, squeeze_check)
from .pipeline import StabilityResult, default_dt, run_stability_experiment
