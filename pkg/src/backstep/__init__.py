"""Fredholm backstepping for skew-adjoint Fourier-multiplier systems.

Spectral-Galerkin synthesis and verification of rapid-stabilisation
feedbacks for the linearised capillary-gravity water-wave system and for
generic multipliers ``i h(|D_x|)``.
"""
from .closed_loop import (ClosedLoopMatrix, DecayFit, NormKind, Trajectory, assemble_closed_loop,
                          closed_loop_spectrum, d_norm, decay_rate, pole_shift_mismatch, simulate)
from .controllability import (ControlPlan, gram_matrix, ingham_gap_report, minimal_norm_control,
                              moment_residuals, verify_null_control)
from .feedback import (FeedbackGains, TransformBundle, asymptotic_refinement, build_T, kn_series,
                       operator_equality_residual, solve_feedback, tbb_residual)
from .profile import ControlProfile, check_condB
from .riesz import (FredholmSplit, RieszFamily, build_S, compact_tail_diagnostic, q_vector,
                    riesz_bounds, riesz_family, sum_bound_check)
from .spectral import (CoeffVector, Kind, Parity, Spectrum, SystemSpec, eigenvalue, gap_constant,
                       parity_combine, parity_decompose, sobolev_inner, validate_multiplier)

__version__ = "0.1.0"
