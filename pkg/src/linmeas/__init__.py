"""Linear position-measurement models.

A linear object–meter interaction is fixed by four real coefficients
(a, b, c, d) with positive determinant.  This package classifies such
interactions, evaluates the error–disturbance figures and the bounds
they face, transforms full probability densities, and cross-checks the
analytic laws against a brute-force wavefunction oracle.
"""

from .config import hbar, set_hbar, use_hbar
from .distribution_engine import (GriddedDistribution, MomentSummary,
                                  convolve, delta_limit_study,
                                  distribution_error_disturbance,
                                  dual_delta_limit_study, gaussian_density,
                                  gaussian_inputs,
                                  general_output_distributions,
                                  ideal_output_distributions, l1_distance,
                                  moments, read_csv, reflect, resample,
                                  rescale, uniform_density, write_csv)
from .errors import (DegenerateInteraction, GridTooNarrow,
                     MeasurementModelError, MismatchedGrids,
                     NegativeDeterminant, NonpositiveBalance,
                     NonpositiveScale)
from .interaction_core import (InteractionParams, StandardFormClass,
                               classify, coefficients_of,
                               commutator_residuals, heisenberg_matrices,
                               inverse_coefficients, new_params,
                               params_from_gains)
from .moment_engine import (ObjectStateSpec, ProbeStateSpec,
                            UncertaintyReport, balance_of, circle_minimum,
                            default_w_grid, evaluate_bounds,
                            gain_referred_error_disturbance,
                            legacy_error_disturbance, normalized_moments,
                            trajectory)
from .verify import CheckResult, all_passed, run_verification
from .wavefunction_oracle import (Axis, JointWavefunction, Wavefunction1D,
                                  apply_interaction, axis_for,
                                  gaussian_packet, load_joint, marginals,
                                  momentum_marginals,
                                  momentum_representation,
                                  momentum_wavefunction,
                                  position_representation, product_joint,
                                  reciprocal_axis, save_joint,
                                  transform_joint)

__version__ = "0.1.0"

__all__ = [
    "Axis", "CheckResult", "DegenerateInteraction", "GriddedDistribution",
    "GridTooNarrow", "InteractionParams", "JointWavefunction",
    "MeasurementModelError", "MismatchedGrids", "MomentSummary",
    "NegativeDeterminant", "NonpositiveBalance", "NonpositiveScale",
    "ObjectStateSpec", "ProbeStateSpec", "StandardFormClass",
    "UncertaintyReport", "Wavefunction1D", "all_passed",
    "apply_interaction", "axis_for", "balance_of", "circle_minimum",
    "classify", "coefficients_of", "commutator_residuals", "convolve",
    "default_w_grid", "delta_limit_study",
    "distribution_error_disturbance", "dual_delta_limit_study",
    "evaluate_bounds", "gain_referred_error_disturbance",
    "gaussian_density", "gaussian_inputs", "gaussian_packet",
    "general_output_distributions", "hbar", "heisenberg_matrices",
    "ideal_output_distributions", "inverse_coefficients", "l1_distance",
    "legacy_error_disturbance", "load_joint", "marginals", "moments",
    "momentum_marginals", "momentum_representation",
    "momentum_wavefunction", "new_params", "normalized_moments",
    "params_from_gains", "position_representation", "product_joint",
    "read_csv", "reciprocal_axis", "reflect", "resample", "rescale",
    "run_verification", "save_joint", "set_hbar", "trajectory",
    "transform_joint", "uniform_density", "use_hbar", "write_csv",
]
