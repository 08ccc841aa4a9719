"""Acceptance criteria, each at its stated tolerance.

Every criterion is a plain function returning ``(ok, detail)``; the pytest
wrappers assert on it and the summary hook in ``conftest.py`` prints one
PASS/FAIL line per criterion.  Run directly (``python tests/test_acceptance.py``)
to get the same lines without pytest.

Criterion 1 runs the full cross-validation grid at 10**6 main blocks x 10
rounds per point; it takes several minutes on one core.
"""

import csv
import functools
import io
import os
from pathlib import Path

import numpy as np

from stubborn_ghost.metrics import analyze, hazard_index, relative_revenue
from stubborn_ghost.params import STRATEGY_ORDER, Strategy, SystemParams, derive_rates
from stubborn_ghost.selection import solve_selection
from stubborn_ghost.simulator import run_rounds, simulate
from stubborn_ghost.state_space import enumerate_reachable
from stubborn_ghost.steady_state import build_generator, solve_stationary
from stubborn_ghost.sweep import SweepConfig, alpha_grid, compare, read_csv, run_sweep, to_csv

GOLDEN = Path(__file__).parent / "data" / "golden_selfish.csv"
CROSS_ALPHAS = (0.05, 0.15, 0.25, 0.35, 0.45)
FIG_THETAS = (0.005, 0.05, 0.2)
WORKERS = os.cpu_count() or 1


@functools.lru_cache(maxsize=None)
def _an(name, alpha, theta, delta_max=150):
    return analyze(SystemParams(alpha, theta, Strategy.from_name(name)), delta_max)


def _classic(a, g=0.5):
    return (a * (1 - a) ** 2 * (4 * a + g * (1 - 2 * a)) - a ** 3) / (1 - a * (1 + (2 - a) * a))


def _sign_change(name, theta, step=0.01):
    """Interpolated alpha where HI crosses zero from below, or None."""
    alphas = [round(0.05 + k * step, 10) for k in range(int(round(0.4 / step)) + 1)]
    prev = None
    for a in alphas:
        h = _an(name, a, theta).hi
        if prev is not None and prev[1] < 0 <= h:
            a0, h0 = prev
            return a0 + (a - a0) * (-h0) / (h - h0)
        prev = (a, h)
    return None


# -- criteria -----------------------------------------------------------------


def criterion_1():
    cfg = SweepConfig(strategies=STRATEGY_ORDER, alphas=CROSS_ALPHAS, thetas=FIG_THETAS,
                      mode="both", rounds=10, blocks=1_000_000, seed=20240601,
                      workers=WORKERS)
    rows, errors = run_sweep(cfg)
    if errors:
        return False, f"{len(errors)} points failed: {errors[0]}"
    an = [r for r in rows if r.source == "analytic"]
    sim = [r for r in rows if r.source == "sim"]
    rep = compare(an, sim, 0.01)
    worst = max(rep.diffs, key=rep.diffs.get)
    return rep.ok, (f"{len(rep.diffs)} points, max |d rr_m| = {rep.max_diff:.4f} at {worst}, "
                    f"mean {rep.mean_diff:.4f} (tol 0.01)")


def criterion_2():
    r15 = _an("L", 0.15, 0.005)
    r05 = _an("L", 0.05, 0.005)
    checks = [
        ("rr(L,0.15)", r15.rr_m, 0.115, 0.010),
        ("rr(L,0.05)", r05.rr_m, 0.03, 0.01),
        ("HI(L,0.05)", r05.hi, -0.41, 0.04),
        ("HI(L,0.15)", r15.hi, -0.23, 0.03),
    ]
    ok = all(abs(v - want) <= tol for _, v, want, tol in checks)
    return ok, ", ".join(f"{n}={v:.4f} (want {w}+-{t})" for n, v, w, t in checks)


def criterion_3():
    bad, parts = [], []
    for theta in (0.005, 0.05):
        for s in STRATEGY_ORDER:
            t = _sign_change(s, theta)
            if t is None or not 0.22 <= t <= 0.30:
                bad.append(f"{s}@{theta}={t if t is None else round(t, 3)}")
    for s, lo, hi in (("S", 0.10, 0.14), ("T", 0.10, 0.14), ("LF", 0.20, 0.24),
                      ("LFT", 0.20, 0.24)):
        t = _sign_change(s, 0.2)
        parts.append(f"{s}@0.2={t if t is None else round(t, 3)} in [{lo},{hi}]")
        if t is None or not lo <= t <= hi:
            bad.append(f"{s}@0.2")
    ranges = []
    for theta in (0.005, 0.05):
        ts = [_sign_change(s, theta) for s in STRATEGY_ORDER]
        ranges.append(f"theta={theta}: [{min(ts):.3f}, {max(ts):.3f}]")
    detail = "; ".join(ranges + parts)
    if bad:
        detail += "; out of range: " + ", ".join(bad)
    return not bad, detail


def _crossover(theta):
    """(crossover alpha or None, description) on the 0.02-step figure grid."""
    best = []
    for a in alpha_grid():
        rr = {s: _an(s, a, theta).rr_m for s in STRATEGY_ORDER}
        best.append((a, max(rr, key=rr.get)))
    selfish = [a for a, s in best if s == "S"]
    stubborn = [a for a, s in best if s != "S"]
    if not selfish or not stubborn or max(selfish) > min(stubborn):
        return None, f"no clean switch: {best}"
    x = 0.5 * (max(selfish) + min(stubborn))
    return x, f"S best up to {max(selfish)}, {best[len(selfish)][1]} from {min(stubborn)}"


def criterion_4():
    x1, d1 = _crossover(0.005)
    x2, d2 = _crossover(0.2)
    ok = x1 is not None and 0.28 <= x1 <= 0.34 and x2 is not None and 0.25 <= x2 <= 0.31
    return ok, (f"theta=0.005: crossover {x1} in [0.28,0.34] ({d1}); "
                f"theta=0.2: crossover {x2} in [0.25,0.31] ({d2})")


def criterion_5():
    bad = []
    for theta in FIG_THETAS:
        prev = None
        for a in alpha_grid():
            t = {s: _an(s, a, theta).tps for s in STRATEGY_ORDER}
            order = sorted(t, key=t.get)
            if set(order[:2]) != {"LF", "LFT"}:
                bad.append(f"smallest at ({a},{theta}) = {order[:2]}")
            if set(order[-2:]) != {"S", "T"}:
                bad.append(f"largest at ({a},{theta}) = {order[-2:]}")
            if max(t.values()) > 1:
                bad.append(f"tps > 1 at ({a},{theta})")
            if prev is not None and any(t[s] >= prev[s] for s in t):
                bad.append(f"not decreasing at ({a},{theta})")
            prev = t
    n = 3 * len(alpha_grid())
    return not bad, f"{n} grid points, {len(bad)} violations" + (f": {bad[:4]}" if bad else "")


def criterion_6():
    alphas = tuple(round(0.1 + 0.05 * k, 2) for k in range(8))
    an_err, sim_err = [], []
    for a in alphas:
        p = SystemParams(a, 1e-6, Strategy())
        want = _classic(a)
        an_err.append(abs(analyze(p).rr_m - want))
        sim_err.append(abs(run_rounds(p, 10, 1_000_000, base_seed=600).rr_m - want))
    ok = max(an_err) <= 1e-3 and max(sim_err) <= 5e-3
    return ok, (f"alpha 0.1..0.45: max analytic err {max(an_err):.2e} (tol 1e-3), "
                f"max sim err {max(sim_err):.2e} (tol 5e-3)")


def _drift(name, alpha, theta):
    pis = []
    for dm in (40, 80):
        p = SystemParams(alpha, theta, Strategy.from_name(name))
        space = enumerate_reachable(p.strategy, derive_rates(p), dm)
        pis.append(solve_stationary(build_generator(space)))
    return max(abs(pis[0][s] - pis[1][s]) for s in pis[0].space.states)


def criterion_7():
    fails, notes = [], []
    # stationary distribution and selection table invariants
    worst_res = 0.0
    for s in STRATEGY_ORDER:
        for a in CROSS_ALPHAS:
            for th in FIG_THETAS:
                p = SystemParams(a, th, Strategy.from_name(s))
                rates = derive_rates(p)
                space = enumerate_reachable(p.strategy, rates, 100)
                pi = solve_stationary(build_generator(space))
                sel = solve_selection(space, rates)
                worst_res = max(worst_res, pi.residual)
                if abs(pi.pi.sum() - 1) > 1e-12 or pi.residual >= 1e-10:
                    fails.append(f"pi {s},{a},{th}")
                if not np.all(sel.p_a + sel.p_h == 1.0):
                    fails.append(f"P_A+P_H {s},{a},{th}")
                r = _an(s, a, th)
                if abs(r.rr_m + r.rr_h - 1) > 1e-15:
                    fails.append(f"rr sum {s},{a},{th}")
    notes.append(f"max balance residual {worst_res:.1e}")
    if hazard_index(0.3, 0.3) != 0 or relative_revenue(0.3, 0.7)[0] != 0.3:
        fails.append("HI(rr=alpha)")
    # truncation drift at alpha = 0.45
    drift = max(_drift(s, 0.45, th) for s in STRATEGY_ORDER for th in (0.005, 0.2))
    notes.append(f"delta_max 40->80 drift at alpha=0.45 {drift:.1e} (tol 1e-8)")
    if not drift < 1e-8:
        fails.append("truncation drift")
    # simulator determinism
    p = SystemParams(0.35, 0.05, Strategy.from_name("LFT"))
    if simulate(p, 50_000, seed=77) != simulate(p, 50_000, seed=77):
        fails.append("sim determinism")
    # rr_m nondecreasing in theta
    thetas = (0.005, 0.01, 0.05, 0.1, 0.2)
    drops = []
    for s in STRATEGY_ORDER:
        for a in CROSS_ALPHAS:
            v = [_an(s, a, th).rr_m for th in thetas]
            if any(y < x for x, y in zip(v, v[1:])):
                drops.append(f"{s}@{a}")
    notes.append(f"rr_m decreases in theta for {len(drops)}/40 (strategy, alpha) pairs")
    if drops:
        fails.append("theta monotonicity")
    detail = "; ".join(notes) + ("; failed: " + ", ".join(fails) if fails else "")
    return not fails, detail


def selfish_rows():
    rows, _ = run_sweep(SweepConfig(strategies=("S",), alphas=alpha_grid(),
                                    thetas=(0.005, 0.05)))
    return rows


def criterion_8():
    rows = selfish_rows()
    fails = []
    for th in (0.005, 0.05):
        v = [r.rr_m for r in rows if r.theta == th]
        if any(y <= x for x, y in zip(v, v[1:])):
            fails.append(f"not monotone at theta={th}")
        t = _sign_change("S", th)
        if t is None or not 0.22 <= t <= 0.30:
            fails.append(f"HI sign change {t} at theta={th}")
    golden = read_csv(GOLDEN)
    current = read_csv_text(to_csv(rows))
    if [(g["strategy"], g["alpha"], g["theta"]) for g in golden] != \
            [(c["strategy"], c["alpha"], c["theta"]) for c in current]:
        fails.append("golden keys differ")
        gap = float("nan")
    else:
        gap = max(abs(float(g["rr_m"]) - float(c["rr_m"])) for g, c in zip(golden, current))
        if not gap <= 1e-9:
            fails.append("golden values differ")
    return not fails, (f"{len(rows)} rows monotone in alpha, max |d| to golden {gap:.1e}"
                       + ("; failed: " + ", ".join(fails) if fails else ""))


def read_csv_text(text):
    return list(csv.DictReader(io.StringIO(text)))


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 9)}


# -- pytest wrappers ----------------------------------------------------------


def _check(n, record):
    ok, detail = CRITERIA[n]()
    record[n] = (ok, detail)
    assert ok, detail


def test_criterion_1_cross_validation(acceptance_record):
    _check(1, acceptance_record)


def test_criterion_2_point_values(acceptance_record):
    _check(2, acceptance_record)


def test_criterion_3_thresholds(acceptance_record):
    _check(3, acceptance_record)


def test_criterion_4_crossover(acceptance_record):
    _check(4, acceptance_record)


def test_criterion_5_throughput_ordering(acceptance_record):
    _check(5, acceptance_record)


def test_criterion_6_classic_limit(acceptance_record):
    _check(6, acceptance_record)


def test_criterion_7_properties(acceptance_record):
    _check(7, acceptance_record)


def test_criterion_8_selfish_regression(acceptance_record):
    _check(8, acceptance_record)


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}", flush=True)
