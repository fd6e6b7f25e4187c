"""Residual checks, seeded sampling and report serialisation."""
from .checks import (check_ambient_conditions, check_bach_vanishing, check_coordinate_equivalence, check_dilation,
                     check_einstein, check_homothety_gradient, check_killing_lift, check_normal_form,
                     check_special_killing, holonomy_algebra_estimate, linearity_slope, mismatched_family,
                     normal_form_comparison, perturb_patch, unit_direction)
from .reports import CSV_COLUMNS, CheckReport, csv_text, plain_text
from .sampling import SamplePlan, evaluate, thread_count
from .transport_checks import (TransportProbe, check_drag_lemma, check_loop_identity, check_probe_crossing,
                               check_transverse_holonomy, drag_residuals, euler_probe, excursion_loops,
                               projected_loop, transverse_holonomy_residual)

__all__ = [
    "CSV_COLUMNS", "CheckReport", "SamplePlan", "TransportProbe", "check_ambient_conditions", "check_bach_vanishing",
    "check_coordinate_equivalence", "check_dilation", "check_drag_lemma", "check_einstein",
    "check_homothety_gradient", "check_killing_lift", "check_loop_identity", "check_normal_form",
    "check_probe_crossing", "check_special_killing", "check_transverse_holonomy", "csv_text", "drag_residuals",
    "euler_probe",
    "evaluate", "excursion_loops", "holonomy_algebra_estimate", "linearity_slope", "mismatched_family",
    "normal_form_comparison", "perturb_patch", "plain_text", "projected_loop", "thread_count",
    "transverse_holonomy_residual", "unit_direction",
]
