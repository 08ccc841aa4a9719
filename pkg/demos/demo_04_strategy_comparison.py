"""
Which strategy pays
===================

Relative revenue, throughput and hazard index of all eight strategies on a
coarse grid, plus the attacker power at which a stubborn strategy overtakes
plain selfish mining.  Writes ``strategies.csv`` and ``rr_m.svg`` next to
this script.
"""

from pathlib import Path

from stubborn_ghost.sweep import SweepConfig, alpha_grid, run_sweep, to_csv, to_svg

here = Path(__file__).parent
cfg = SweepConfig(alphas=alpha_grid(0.05, 0.45, 0.04), thetas=(0.005,), delta_max=100)
rows, _ = run_sweep(cfg)
(here / "strategies.csv").write_text(to_csv(rows))
(here / "rr_m.svg").write_text(to_svg(rows))

by_alpha = {}
for r in rows:
    by_alpha.setdefault(r.alpha, []).append(r)
print(" alpha  best    rr_m   | lowest tps")
for a, rs in sorted(by_alpha.items()):
    best = max(rs, key=lambda r: r.rr_m)
    slow = sorted(rs, key=lambda r: r.tps)[:2]
    print(f"  {a:.2f}  {best.strategy:<5} {best.rr_m:.4f} | {slow[0].strategy}, {slow[1].strategy}")

# where does the hazard index turn positive?
for name in ("S", "LFT"):
    his = [(r.alpha, r.hi) for r in rows if r.strategy == name]
    first = next(a for a, h in his if h > 0)
    print(f"{name}: HI first positive at alpha={first}")
