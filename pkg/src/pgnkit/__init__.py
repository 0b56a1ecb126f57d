"""Templates of parametric geometry of numbers, their scores, and the
successive minima of lattices under the diagonal flow.

Template arithmetic is exact (``fractions.Fraction``); lattice dynamics use
binary64 or, on request, mpmath numbers.
"""

from .template_builders import (anchor_sequence, build_f1, build_fk, f1_anchors, interval_ratio,
                                phi, phi_anchors, standard_block)
from .template_core import (Dims, LinkedTemplate, PiecewisePath, Template, ValidationReport,
                            Violation, dumps_template, evaluate, loads_template, path_from_samples,
                            slope_set, sup_distance, template_from_dict, template_to_dict,
                            validate_template)
from .errors import (BudgetExceededError, DomainError, FlowRangeError, InvalidTemplateError,
                     InvariantError, PGNError)
from .lattice_dynamics import (Lattice, MinimaTrace, OccupationProfile, SingularityProbe,
                               TraceComparison, apply_flow, compare_trace_to_template,
                               distortion_bound, identity_lattice, log_minima_trace,
                               make_lattice_from_A, occupation_fraction, random_lattice,
                               singularity_probe, successive_minima, successive_minima_oracle,
                               sup_operator_norm, theta_from_partial_quotients, time_grid,
                               weak_stable_element, weak_stable_perturb)
from .score_engine import (DeltaProfile, EqualityInterval, ScoreReport, ScoreSegment,
                           average_delta, closed_form_delta, count_pairs, delta_on_piece,
                           equality_intervals, m_plus_minus, s_plus, score_template)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
