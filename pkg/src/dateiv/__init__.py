"""Stochastic potential outcomes, the DATE, and instrumental-variable identification."""
from .population import (
    ComplianceClass,
    Individual,
    Population,
    census,
    check_compliers_exist,
    check_no_defiers,
    classify,
    compliers,
    date,
    date_weights,
    degree_of_compliance,
    individual_treatment_effect,
    is_deterministic,
    late,
)
from .cbn import CausalBayesNet, Dag, Variable
from .iv import IvNetConfig, TheoremReport, build_iv_net, closed_form_conditionals, iv_estimand, theorem1_check

__version__ = "0.1.0"
