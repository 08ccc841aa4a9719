"""
From stationary distribution to relative revenue
================================================

Walk through the analytic pipeline one stage at a time for a single
parameter point: rates, reachable states, stationary distribution,
selection probabilities and finally the revenue report.
"""

from stubborn_ghost import (SystemParams, build_generator, derive_rates, enumerate_reachable,
                            expected_revenues, hazard_index, relative_revenue, solve_selection,
                            solve_stationary, tps)
from stubborn_ghost.state_space import FRESH, ChainState, tie, trail_tie

params = SystemParams(alpha=0.3, theta=0.1, strategy="LFT")
rates = derive_rates(params)
print(rates)

space = enumerate_reachable(params.strategy, rates, delta_max=100)
pi = solve_stationary(build_generator(space))
print(f"{len(space)} states, balance residual {pi.residual:.1e}")
for s in (FRESH, ChainState(1, 0, 1), tie(1, 2), trail_tie(1, 1)):
    print(f"  pi{s.label():<10} = {pi[s]:.5f}")

# probability that the current private root ends up as consensus block
sel = solve_selection(space, rates)
for s in (ChainState(1, 0, 1), ChainState(2, 1, 2), tie(1, 2), ChainState(-1, 1, 1)):
    print(f"  P_A{s.label():<10} = {sel.P_A(s):.5f}")

e_m, e_h = expected_revenues(pi, sel, space)
rr_m, rr_h = relative_revenue(e_m, e_h)
print(f"rr_m={rr_m:.4f}  tps={tps(e_m, e_h):.4f}  HI={hazard_index(rr_m, params.alpha):+.4f}")
