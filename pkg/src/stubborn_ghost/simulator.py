"""Monte Carlo simulation of the explicit block tree.

The kernel in :mod:`._kernel` keeps every live block behind the current
consensus block, resolves forks with GHOST and lets the attacker react to
each event from tree quantities only.  Nothing here reads the analytic
transition table, so the two can be used to check each other.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernel as K
from .params import Strategy, SystemParams, derive_rates
from .state_space import ChainState

DEFAULT_CAP = 1 << 14
MIN_TARGET = 10_000


@dataclass
class SimResult:
    """Counts from one simulation run.

    ``main_*`` blocks became consensus blocks, ``stale_*`` were orphaned and
    ``pending_*`` were still unsettled when the run stopped, so
    ``main + stale + pending == total`` for each owner.
    """

    strategy: str
    alpha: float
    theta: float
    seed: int
    events: int
    event_rate: float
    main_mp: int
    main_hp: int
    stale_mp: int
    stale_hp: int
    total_mp: int
    total_hp: int
    pending_mp: int
    pending_hp: int
    envelope_violations: int
    overflow: bool
    visits: dict = field(default_factory=dict, repr=False)

    @property
    def main(self) -> int:
        return self.main_mp + self.main_hp

    @property
    def rr_m(self) -> float:
        return self.main_mp / self.main if self.main else float("nan")

    @property
    def elapsed(self) -> float:
        """Expected elapsed time (events divided by the total event rate)."""
        return self.events / self.event_rate

    @property
    def tps(self) -> float:
        return self.main / self.elapsed if self.events else float("nan")

    def time_fractions(self) -> dict:
        n = sum(self.visits.values())
        return {k: v / n for k, v in self.visits.items()}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["visits"] = {k.label(): v for k, v in self.visits.items()}
        d["rr_m"] = self.rr_m
        d["tps"] = self.tps
        return d


def _state_from_code(d: int, hs: int, n: int, mark: int) -> ChainState:
    return ChainState(int(d), int(hs), int(n), ("", "'", "''")[int(mark)])


def _visits_to_dict(v: np.ndarray) -> dict:
    out = {}
    for idx in zip(*np.nonzero(v)):
        di, hs, n, mark = (int(x) for x in idx)
        out[_state_from_code(di - 2, hs, n, mark)] = int(v[idx])
    return out


def simulate(params: SystemParams, target_main_blocks: int = 100_000, seed: int = 0,
             honest: bool = False, trace_events: int = 0, cap: int = DEFAULT_CAP,
             max_events: int | None = None):
    """Run until ``target_main_blocks`` blocks have settled.

    Returns a :class:`SimResult`, or ``(result, trace)`` when
    ``trace_events > 0``; the trace holds the abstract state before and after
    each of the first events (see :func:`check_trace`).
    """
    if target_main_blocks < MIN_TARGET:
        raise ValueError(f"target_main_blocks must be >= {MIN_TARGET}")
    s = params.strategy
    visits = np.zeros((K.VISIT_DELTA, 4, 8, 3), np.int64)
    trace = np.zeros((trace_events, K.TRACE_W), np.int64)
    if max_events is None:
        max_events = 50 * target_main_blocks + 1000
    # events are sampled as MP w.p. alpha, one HP block w.p. beta(1-theta), fork
    # w.p. beta*theta whatever rate convention the analytic side uses
    r_mp, r_one, r_two = derive_rates(params).generator_rates("unified-embedded")
    tot = r_mp + r_one + r_two
    stats = K.simulate_kernel(r_mp / tot, (r_mp + r_one) / tot, int(s.L), int(s.F),
                              int(s.T), bool(honest), int(target_main_blocks), int(seed),
                              int(cap), visits, trace, int(max_events))
    res = SimResult(
        strategy=s.name if not honest else "honest", alpha=params.alpha, theta=params.theta,
        seed=int(seed), events=int(stats[K.S_EVENTS]),
        event_rate=float(tot),
        main_mp=int(stats[K.S_MAIN_MP]), main_hp=int(stats[K.S_MAIN_HP]),
        stale_mp=int(stats[K.S_STALE_MP]), stale_hp=int(stats[K.S_STALE_HP]),
        total_mp=int(stats[K.S_TOT_MP]), total_hp=int(stats[K.S_TOT_HP]),
        pending_mp=int(stats[K.S_PENDING_MP]), pending_hp=int(stats[K.S_PENDING_HP]),
        envelope_violations=int(stats[K.S_ENVELOPE]), overflow=bool(stats[K.S_OVERFLOW]),
        visits=_visits_to_dict(visits))
    if trace_events:
        return res, trace[: min(trace_events, res.events)]
    return res


@dataclass
class RoundsSummary:
    """Mean and standard error over independent rounds."""

    strategy: str
    alpha: float
    theta: float
    rounds: int
    blocks_per_round: int
    base_seed: int
    rr_m: float
    rr_m_stderr: float
    tps: float
    tps_stderr: float
    per_round: list = field(repr=False, default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _mean_se(xs):
    n = len(xs)
    m = sum(xs) / n
    if n < 2:
        return m, float("nan")
    var = sum((x - m) ** 2 for x in xs) / (n - 1)
    return m, math.sqrt(var / n)


def run_rounds(params: SystemParams, rounds: int = 10, blocks_per_round: int = 100_000,
               base_seed: int = 0, honest: bool = False) -> RoundsSummary:
    """Independent rounds seeded ``base_seed + r``."""
    if rounds < 2:
        raise ValueError("rounds must be >= 2 for a standard error")
    per = [simulate(params, blocks_per_round, base_seed + r, honest=honest)
           for r in range(rounds)]
    rr, rr_se = _mean_se([r.rr_m for r in per])
    tp, tp_se = _mean_se([r.tps for r in per])
    rows = [{"seed": r.seed, "rr_m": r.rr_m, "tps": r.tps, "events": r.events,
             "envelope_violations": r.envelope_violations} for r in per]
    return RoundsSummary(per[0].strategy, params.alpha, params.theta, rounds,
                         blocks_per_round, base_seed, rr, rr_se, tp, tp_se, rows)


# -- soundness check against the abstract chain ------------------------------

def _label(pre: ChainState, kind: int, in_private: int, same_leaf: int) -> tuple:
    """Map an observed event onto the analytic (kind, placement) vocabulary."""
    if kind == 0:
        return ("MP_BLOCK", "")
    if kind == 1:
        return ("HP_ONE", "pri" if in_private else "pub")
    if pre.fresh or pre.hs == 0 or pre.delta < 0:
        return ("HP_TWO", "H")
    if pre.trailing:
        if pre.hs == 1:
            return ("HP_TWO", "H")
        return ("HP_TWO", "H1" if same_leaf else "H2")
    if in_private == 2:
        return ("HP_TWO", "A")
    if in_private == 1:
        return ("HP_TWO", "AH")
    if pre.n == 2:
        return ("HP_TWO", "H")
    return ("HP_TWO", "H1" if same_leaf else "H2")


def check_trace(trace: np.ndarray, strategy: Strategy, delta_max: int = 60,
                honest: bool = False) -> list:
    """Compare each traced step with the analytic successor set.

    Returns a list of mismatch descriptions (empty when every observed step
    is one of the transitions the analytic chain allows for that event).
    """
    from .state_space import successors

    bad = []
    cache = {}
    for row in trace:
        pre = _state_from_code(*row[0:4])
        post = _state_from_code(*row[7:11])
        if pre.delta >= delta_max:
            continue
        if pre not in cache:
            cache[pre] = successors(pre, strategy, delta_max, honest=honest)
        kind, place = _label(pre, int(row[4]), int(row[5]), int(row[6]))
        ok = set()
        for tr in cache[pre]:
            if tr.event.kind == kind and tr.event.placement == place:
                ok.add(tr.next)
        if post not in ok:
            bad.append((pre.label(), kind, place, post.label(), sorted(s.label() for s in ok)))
    return bad


__all__ = ["SimResult", "RoundsSummary", "simulate", "run_rounds", "check_trace"]
