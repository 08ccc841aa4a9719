"""Subtree selection probabilities.

``P_A(s)`` is the probability that the root of the private subtree becomes
the next consensus block when the chain sits in state ``s``; ``P_H`` is its
complement. Both follow from first-step analysis over the transitions of
``state_space``: an event either decides the private root's fate or moves
to a state where the same root is still contested. ``Pb`` is the part of
``P_A`` contributed by honest events alone.

Beyond ``delta_max`` the private root is taken to win, and the attacker's
run of consecutive blocks is summed in closed form (the equal-fork hold
chain is the geometric series bounded by :func:`geometric_tail_bound`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .params import DerivedRates
from .state_space import CONTINUE, KIND_MP, LOSE, WIN, ChainState, StateSpace


class SelectionError(RuntimeError):
    pass


def geometric_tail_bound(alpha: float, k: int) -> float:
    """Remainder bound of ``sum_{i>k} alpha**i`` (terms bounded by 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return alpha ** (k + 1) / (1.0 - alpha)


def series_terms(alpha: float, tol: float) -> int:
    """Smallest ``k`` whose geometric remainder is below ``tol / 10``."""
    if alpha <= 0.0:
        return 0
    k = max(0, math.ceil(math.log(tol / 10 * (1 - alpha)) / math.log(alpha)) - 1)
    while geometric_tail_bound(alpha, k) >= tol / 10:
        k += 1
    return k


@dataclass(frozen=True)
class SelectionTable:
    states: tuple
    p_a: np.ndarray
    pb: np.ndarray
    delta_max: int
    series_terms: int
    residual: float

    @property
    def p_h(self) -> np.ndarray:
        return 1.0 - self.p_a

    @property
    def index(self):
        return {s: i for i, s in enumerate(self.states)}

    def P_A(self, state: ChainState) -> float:
        return float(self.p_a[self.index[state]])

    def P_H(self, state: ChainState) -> float:
        return 1.0 - self.P_A(state)

    def Pb(self, state: ChainState) -> float:
        return float(self.pb[self.index[state]])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["state", "P_A", "P_H", "Pb"])
            for s, a, b in zip(self.states, self.p_a, self.pb):
                w.writerow([s.label(), repr(float(a)), repr(float(1 - a)), repr(float(b))])


def _system(space: StateSpace, rates: DerivedRates):
    """Matrix ``M`` and vectors for ``p = M p + b`` over contested states."""
    states = tuple(s for s in space.states if not s.fresh)
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    M = np.zeros((n, n))
    b = np.zeros(n)
    Mb = np.zeros((n, n))
    bb = np.zeros(n)
    probs = dict(zip(("MP_BLOCK", "HP_ONE", "HP_TWO"), rates.event_probs()))
    for s, trs in zip(space.states, space.transitions):
        if s.fresh:
            continue
        i = idx[s]
        for tr in trs:
            p = probs[tr.event.kind] * tr.weight
            hp = tr.event.kind != KIND_MP
            if tr.fate == WIN or tr.truncated:
                b[i] += p
                if hp:
                    bb[i] += p
            elif tr.fate == CONTINUE:
                if tr.next.fresh:
                    raise SelectionError(f"{s} -> fresh state without a decided fate")
                M[i, idx[tr.next]] += p
                if hp:
                    Mb[i, idx[tr.next]] += p
            elif tr.fate != LOSE:
                raise SelectionError(f"unknown fate {tr.fate!r}")
    return states, M, b, Mb, bb


def solve_selection(space: StateSpace, rates: DerivedRates, tol: float = 1e-12) -> SelectionTable:
    states, M, b, Mb, bb = _system(space, rates)
    n = len(states)
    p = np.linalg.solve(np.eye(n) - M, b)
    if (p < -1e-12).any() or (p > 1 + 1e-12).any():
        raise SelectionError("selection probability outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    residual = float(np.abs(M @ p + b - p).max()) if n else 0.0
    if residual > max(tol, 1e-10):
        raise SelectionError(f"selection system residual {residual:.3e}")
    pb = Mb @ p + bb
    return SelectionTable(states, p, pb, space.delta_max, series_terms(rates.alpha, tol), residual)


def absorption_by_iteration(space: StateSpace, rates: DerivedRates, tol: float = 1e-13,
                            max_iter: int = 200_000) -> np.ndarray:
    """Minimal nonnegative solution of ``p = M p + b`` by monotone iteration."""
    _, M, b, _, _ = _system(space, rates)
    p = np.zeros_like(b)
    for _ in range(max_iter):
        new = M @ p + b
        if np.abs(new - p).max() < tol:
            return new
        p = new
    raise SelectionError("value iteration did not converge")


def closed_form_trailing(rates: DerivedRates) -> dict:
    """Closed forms for single-public-leaf trailing states."""
    a, pb1 = rates.alpha, rates.p_beta1
    return {
        ChainState(0, 1, 1, "''"): a / (1 - pb1 * a),
        ChainState(-1, 1, 1): a * a / (1 - pb1 * a),
    }


def selection_for(strategy, rates: DerivedRates, delta_max: int = 60,
                  convention: str = "unified-embedded") -> SelectionTable:
    from .state_space import enumerate_reachable

    return solve_selection(enumerate_reachable(strategy, rates, delta_max, convention), rates)

