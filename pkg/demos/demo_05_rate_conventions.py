"""
Two readings of the honest block rate
=====================================

Single honest blocks can be given the rate ``beta(1 - 2 theta)`` on chain
arcs while selection probabilities use ``beta(1 - theta)``
(``paper-literal``), or one consistent set of per-event probabilities can
be used throughout (``unified-embedded``).  The simulator samples events
directly, so it tells which reading describes the process.
"""

from dataclasses import replace

from stubborn_ghost import SystemParams, analyze, run_rounds

print("strat alpha theta |   sim rr_m     | unified | literal")
for name, alpha, theta in (("S", 0.3, 0.2), ("LF", 0.25, 0.2), ("LFT", 0.45, 0.05)):
    p = SystemParams(alpha, theta, name)
    sim = run_rounds(p, 4, 200_000, base_seed=7)
    uni = analyze(p).rr_m
    lit = analyze(replace(p, rate_convention="paper-literal")).rr_m
    print(f"{name:>5} {alpha:5.2f} {theta:5.3f} | {sim.rr_m:.4f}+-{sim.rr_m_stderr:.4f} |"
          f" {uni:.4f}  | {lit:.4f}")
