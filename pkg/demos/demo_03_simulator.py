"""
Simulating the explicit block tree
==================================

The simulator grows every block behind the consensus block, resolves forks
with GHOST and lets the attacker react from tree quantities alone.  Here it
is compared with the analytic pipeline at one point, and a trace of the
first events is checked against the analytic transition table.
"""

from stubborn_ghost import SystemParams, analyze, check_trace, run_rounds, simulate

params = SystemParams(alpha=0.35, theta=0.05, strategy="LT")

agg = run_rounds(params, rounds=5, blocks_per_round=200_000, base_seed=1)
rep = analyze(params)
print(f"simulated rr_m {agg.rr_m:.4f} +- {agg.rr_m_stderr:.4f}, analytic {rep.rr_m:.4f}")
print(f"simulated tps  {agg.tps:.4f} +- {agg.tps_stderr:.4f}, analytic {rep.tps:.4f}")

# block bookkeeping of a single run
res = simulate(params, 100_000, seed=3)
print(f"main MP/HP {res.main_mp}/{res.main_hp}, stale MP/HP {res.stale_mp}/{res.stale_hp}, "
      f"still pending {res.pending_mp + res.pending_hp}, envelope overruns {res.envelope_violations}")

# debug mode: map the tree onto chain states at every event
res, trace = simulate(params, 10_000, seed=4, trace_events=50_000)
mismatches = check_trace(trace, params.strategy)
print(f"{len(trace)} traced events, {len(mismatches)} steps outside the analytic table")

# the most visited states
top = sorted(res.time_fractions().items(), key=lambda kv: -kv[1])[:6]
print("time fractions:", ", ".join(f"{s.label()} {v:.3f}" for s, v in top))
