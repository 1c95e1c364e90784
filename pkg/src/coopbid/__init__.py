"""Cooperative bid optimizer for GSP keyword auctions.

Pipeline: ``build_game`` (Nash bargaining per coalition) ->
``compute_nucleolus`` -> ``map_to_correlated`` (LEF bids + LP), plus a
repeated-auction simulator comparing the optimizer with plain GSP.
"""

from .bargaining import (BargainingPoint, CharacteristicGame, SurplusStats, build_game,
                         characteristic_value, coalition_surplus_stats, nbs_solve)
from .gsp import AllocationOutcome, Market, allocate, truthful_revenue
from .lef import (CorrelatedBidProfile, LefBidProfile, MappingResult, build_mapping_lp,
                  equilibrium_report, lef_bids, map_to_correlated)
from .lp import LinearProgram, LpSolution, Status, solve_lp
from .nucleolus import brute_force_nucleolus, compute_nucleolus, core_check
from .simulation import (BidderState, MetricsTable, SimulationConfig, dropout_probability,
                         participation_probability, record_outcome, run_round, run_simulation)

__version__ = "0.1.0"
