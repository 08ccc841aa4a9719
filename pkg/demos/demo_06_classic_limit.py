"""
Selfish mining without forks
============================

With almost no forks and all strategy flags off, the model collapses to the
classic selfish-mining chain where a tie is won half of the time.  Its
relative revenue has a closed form; both the analytic pipeline and the
simulator should land on it.
"""

from stubborn_ghost import SystemParams, analyze, run_rounds, selfish_closed_form

print("alpha  closed   analytic  simulated")
for alpha in (0.1, 0.2, 0.3, 0.4, 0.45):
    p = SystemParams(alpha, 1e-6, "S")
    sim = run_rounds(p, 4, 250_000, base_seed=11)
    print(f"{alpha:5.2f}  {selfish_closed_form(alpha):.5f}  {analyze(p).rr_m:.5f}   "
          f"{sim.rr_m:.5f}")
