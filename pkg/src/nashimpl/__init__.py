"""Two-agent Nash implementation toolkit.

Condition mu2 checking and search, the Moore-Repullo mechanism with exact
equilibrium enumeration, and the entangled-coin mechanism together with its
classical simulation.
"""

from .conditions import ConditionReport, Mu2Witness, lower_contour_witness, search_mu2, verify_mu2
from .engine import (
    Card,
    DollarPayoffs,
    QuantumStrategy,
    RunReport,
    check_lambda_full,
    check_lambda_pi2,
    dollar_payoffs,
    run_algorithmic_mechanism,
    run_quantum_mechanism,
    verify_proposition,
)
from .errors import InputError, ScenarioSemanticError, ScenarioSyntaxError, SearchSpaceError
from .mechanism import Message, UtilityTable, enumerate_nash, implements_check, outcome_g
from .quantum import (
    C_OP,
    D_OP,
    I_OP,
    CollapseDistribution,
    LocalOp,
    QuantumState,
    collapse_distribution,
    entangler_matrix,
    final_state,
    sample_collapse,
    strategy_matrix,
)
from .scenario import Scenario, load_scenario, parse_scenario, to_json, to_text
from .social_choice import Environment, Scr, check_lambda_ordinal, lower_contour, maximal_set

__version__ = "0.1.0"
