"""Capital-constrained hedging of equity-linked claims with maximal expected success ratio."""

__version__ = "0.1.0"

from .claims import Claim, claim_from_table, pure_endowment, unit_linked_call
from .duality import (
    DualMeasure,
    build_dual_measure,
    dual_expectation,
    superhedge_price_via_duality,
    verify_martingale,
)
from .errors import (
    ArbitrageError,
    CapacityError,
    ConfigError,
    DomainError,
    HedgeError,
    MembershipError,
)
from .lattice import LatticeParams, Strategy, build_lattice, price, replicate
from .oracle import McConfig, OracleConfig, brute_force_optimal, monte_carlo_eval
from .scenarios import Field, build_scenario_space, cond_expectation
from .signals import chain_model, enumerate_signal_paths, mortality_model
from .solver import compute_f, compute_slopes, solve_budget, success_ratio
from .superhedge import build_optimal_strategy, evaluate_strategy, upper_envelope
