"""Attack-aware cyber-insurance equilibria.

A protection-vs-attack zero-sum game with exponential losses, nested in an
insurer's contract-design problem.  ``model`` holds the primitives, ``game``
the saddle-point solvers, ``contract`` the insurer's optimum and the bilevel
composition, ``mc`` seeded Monte Carlo verification, and ``cli`` the command
line (``cyins spe|policy|bgne|simulate|sweep``).
"""

from ._backend import available_backends, backend_name, use_backend
from .contract import (
    BgneSolution,
    ConstraintVerdict,
    check_constraints,
    coverage_floor,
    insurer_objective,
    min_coverage,
    premium_cap,
    solve_bgne,
    solve_insurer_lp,
)
from .game import (
    SpeDiagnostics,
    SpeSolution,
    attacker_best_response,
    closed_form_spe,
    insurability_margin,
    insurable_protection_cost_limit,
    insurable_protection_cost_limit_alt,
    min_protection_vs_best_attack,
    min_protection_vs_best_attack_alt,
    numerical_spe,
    user_best_response,
    verify_saddle_inequality,
)
from .mc import (
    DivergenceProbe,
    EstimateWithCI,
    FactorRegime,
    LossFactorEstimate,
    SimConfig,
    VarianceUnboundedWarning,
    divergence_probe,
    estimate_loss_accounting,
    estimate_loss_factor,
    sample_losses,
)
from .model import (
    ActionPair,
    ConvergenceError,
    CyinsError,
    EquilibriumReport,
    InsurancePolicy,
    MarketParams,
    NotInsurableError,
    ParameterError,
    UnboundedRiskError,
    UserRiskProfile,
    equilibrium_report,
    expected_loss_factor,
    feasibility_margin,
    loss_density,
    near_boundary,
    risk_level,
    zero_sum_payoff,
)
from .scenario import Scenario, ScenarioError, build_scenario, load_config

__version__ = "0.1.0"

__all__ = [
    "ActionPair",
    "BgneSolution",
    "ConstraintVerdict",
    "ConvergenceError",
    "CyinsError",
    "DivergenceProbe",
    "EquilibriumReport",
    "EstimateWithCI",
    "FactorRegime",
    "InsurancePolicy",
    "LossFactorEstimate",
    "MarketParams",
    "NotInsurableError",
    "ParameterError",
    "Scenario",
    "ScenarioError",
    "SimConfig",
    "SpeDiagnostics",
    "SpeSolution",
    "UnboundedRiskError",
    "UserRiskProfile",
    "VarianceUnboundedWarning",
    "attacker_best_response",
    "available_backends",
    "backend_name",
    "build_scenario",
    "check_constraints",
    "closed_form_spe",
    "coverage_floor",
    "divergence_probe",
    "equilibrium_report",
    "estimate_loss_accounting",
    "estimate_loss_factor",
    "expected_loss_factor",
    "feasibility_margin",
    "insurability_margin",
    "insurable_protection_cost_limit",
    "insurable_protection_cost_limit_alt",
    "insurer_objective",
    "load_config",
    "loss_density",
    "min_coverage",
    "min_protection_vs_best_attack",
    "min_protection_vs_best_attack_alt",
    "near_boundary",
    "numerical_spe",
    "premium_cap",
    "risk_level",
    "sample_losses",
    "solve_bgne",
    "solve_insurer_lp",
    "use_backend",
    "user_best_response",
    "verify_saddle_inequality",
    "zero_sum_payoff",
]
