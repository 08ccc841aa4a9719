"""Withholding attacks on GHOST chains with unintentional forks.

Two independent routes to the same numbers: a continuous-time Markov chain
over ``(lead, public subtrees, visible leaves)`` and a Monte Carlo simulator
that grows the explicit block tree.
"""

from .metrics import (CSV_FIELDS, RevenueReport, analyze, expected_revenues, hazard_index,
                      relative_revenue, selfish_closed_form, tps)
from .params import (STRATEGY_ORDER, DerivedRates, ParameterDomainError, Strategy,
                     SystemParams, derive_rates, fork_placement, gamma, load_params)
from .selection import SelectionTable, solve_selection
from .simulator import SimResult, check_trace, run_rounds, simulate
from .state_space import ChainState, StateSpace, attacker_action, enumerate_reachable, successors
from .steady_state import StationaryDist, build_generator, solve_stationary
from .sweep import SweepConfig, compare, run_point, run_sweep

__version__ = "0.1.0"
