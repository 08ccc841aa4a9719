"""Chain states ``(delta, hs, n)`` and their block-generation transitions.

A state summarizes the unsettled tree behind the last consensus block:

* ``delta`` -- private-subtree weight minus heaviest public-subtree weight.
  Zero carries a mark: plain ``0`` (nothing behind consensus), ``0'`` (tie,
  honest pools split over both sides) and ``0''`` (tie reached by a trailing
  attacker; honest pools stay on their own subtree).
* ``hs`` -- number of live public subtrees (tied at the heaviest weight).
* ``n`` -- number of leaves honest pools may extend.

Canonical shapes: with ``delta >= 0'`` the published private frontier is
tied with the public side and counts as one leaf, so a single public subtree
carries ``n - 1`` leaves (two leaves = two sibling tips). In trailing states
(``-1``, ``0''``) the private subtree is invisible to honest pools and
``n`` counts public leaves only. The attacker always holds exactly ``delta``
withheld blocks when ``delta >= 1``.

Every transition carries the fate of the current private root (``win``,
``lose`` or ``continue``) and the crediting role of each block published at
the event, which is what revenue accounting and selection probabilities
are built from.
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

from .params import DerivedRates, Strategy

MP, HP = "MP", "HP"
SETTLED, PRIVATE, PUBLIC, DEAD = "settled", "private", "public", "dead"
WIN, LOSE, CONTINUE = "win", "lose", "continue"

KIND_MP, KIND_HP1, KIND_HP2 = "MP_BLOCK", "HP_ONE", "HP_TWO"


class ChainState(NamedTuple):
    delta: int
    hs: int
    n: int
    mark: str = ""

    @property
    def fresh(self) -> bool:
        return self.hs == 0 and self.delta == 0

    @property
    def trailing(self) -> bool:
        return self.delta == -1 or self.mark == "''"

    def label(self) -> str:
        d = f"0{self.mark}" if self.delta == 0 else str(self.delta)
        return f"({d},{self.hs},{self.n})"

    __str__ = label


FRESH = ChainState(0, 0, 1)


def tie(hs: int, n: int) -> ChainState:
    return ChainState(0, hs, n, "'")


def trail_tie(hs: int, n: int) -> ChainState:
    return ChainState(0, hs, n, "''")


def initial_state() -> ChainState:
    return FRESH


def is_valid(s: ChainState, strategy: Strategy | None = None) -> bool:
    d, hs, n, mark = s
    if not (0 <= hs <= 2 and 1 <= n <= 3 and n >= max(hs, 1) and n - hs <= 2):
        return False
    if mark and d != 0:
        return False
    if s.trailing:
        # n counts public leaves only; one subtree may carry two sibling tips
        ok = hs >= 1 and (n == hs or (hs == 1 and n == 2))
        return ok and (strategy is None or strategy.T == 1)
    if d == 0 and mark == "":
        return hs == 0 and n == 1
    if d < -1:
        return False
    if hs == 0:
        return d >= 1 and n == 1
    # tie-visible states: private frontier is one of the n leaves
    return n - 1 >= hs


@dataclass(frozen=True)
class BlockEvent:
    kind: str
    placement: str = ""

    def __str__(self):
        return f"{self.kind}:{self.placement}" if self.placement else self.kind


@dataclass(frozen=True)
class Credit:
    owner: str
    role: str
    count: int = 1
    share: float = 1.0


@dataclass(frozen=True)
class Transition:
    event: BlockEvent
    weight: float  # probability of this placement given the event kind
    next: ChainState
    mp_published: int
    credits: tuple
    fate: str
    action: str
    truncated: bool = False
    rate: float = 0.0
    prob: float = 0.0

    @property
    def reset(self) -> bool:
        return self.next == FRESH

    @property
    def new_blocks(self) -> list[tuple[str, str]]:
        """(owner, residence) of blocks created at this event."""
        if self.event.kind == KIND_MP:
            return [(MP, "private")]
        k = 1 if self.event.kind == KIND_HP1 else 2
        side = {"pri": ["private"], "A": ["private"] * 2, "AH": ["private", "public"]}
        return [(HP, r) for r in side.get(self.event.placement, ["public"] * k)]


def _t(kind, placement, weight, nxt, mp_pub, credits, fate, action, truncated=False):
    return Transition(BlockEvent(kind, placement), weight, nxt, mp_pub, tuple(credits), fate,
                      action, truncated)


def _pub_shape(hs: int, leaves: int) -> float:
    """Win share of one new honest block inside the public side."""
    return 1.0 if (hs == 1 and leaves == 1) else 0.5


def _react(d_old, withheld, i, hs_new, leaves_new, new_hp, strategy, two_way_giveup):
    """Attacker response after the public side gains weight ``i``.

    Returns ``(next, mp_published, fate, credits, action)``.  ``new_hp`` is the
    number of new honest blocks now on the public side; ``two_way_giveup``
    tells whether giving up leaves two tied branches (attacker adopts one)
    rather than a single chain that settles outright.
    """
    d = d_old - i
    share = _pub_shape(hs_new, leaves_new)
    pub_credits = [Credit(HP, PUBLIC, new_hp, share)] if new_hp else []
    if d >= 2 or (d == 1 and strategy.L):
        nxt = ChainState(d, hs_new, leaves_new + 1)
        credits = [Credit(MP, PRIVATE, i)] + pub_credits
        return nxt, i, CONTINUE, credits, f"publish({i})"
    if d == 1:
        credits = [Credit(MP, SETTLED, withheld)]
        if new_hp:
            credits.append(Credit(HP, DEAD, new_hp))
        return FRESH, withheld, WIN, credits, f"publish({withheld})"
    if d == 0:
        credits = ([Credit(MP, PRIVATE, withheld)] if withheld else []) + pub_credits
        return tie(hs_new, leaves_new + 1), withheld, CONTINUE, credits, (
            f"publish({withheld})" if withheld else "hold")
    if d == -1 and strategy.T:
        credits = ([Credit(MP, PRIVATE, withheld)] if withheld else []) + pub_credits
        nxt = ChainState(-1, hs_new, leaves_new)
        return nxt, withheld, CONTINUE, credits, (
            f"publish({withheld})" if withheld else "mine-private")
    # give up: attacker abandons the private subtree
    if two_way_giveup:
        credits = [Credit(HP, PRIVATE, 1), Credit(HP, PUBLIC, 1)] if new_hp == 2 else []
        return tie(1, 2), 0, LOSE, credits, "adopt-public"
    credits = [Credit(HP, SETTLED, new_hp)] if new_hp else []
    return FRESH, 0, LOSE, credits, "adopt-public"


def successors(state: ChainState, strategy: Strategy, delta_max: int = 60,
               honest: bool = False) -> list[Transition]:
    """All outgoing transitions of ``state``; weights sum to 1 per event kind.

    ``honest`` switches the attacker to publish-immediately (test-only
    reference policy).
    """
    if not is_valid(state, strategy):
        raise ValueError(f"invalid state {state} for strategy {strategy}")
    d, hs, n, mark = state
    out = []

    # -- attacker finds a block --------------------------------------------
    if state.fresh:
        if honest:
            out.append(_t(KIND_MP, "", 1.0, FRESH, 1, [Credit(MP, SETTLED)], WIN, "publish(1)"))
        else:
            out.append(_t(KIND_MP, "", 1.0, ChainState(1, 0, 1), 0, [], CONTINUE, "hold"))
    elif d >= 1:
        if d >= delta_max:
            out.append(_t(KIND_MP, "", 1.0, state, 0, [], WIN, "hold", truncated=True))
        else:
            out.append(_t(KIND_MP, "", 1.0, ChainState(d + 1, hs, n), 0, [], CONTINUE, "hold"))
    elif mark == "'":
        if strategy.F and not honest:
            out.append(_t(KIND_MP, "", 1.0, ChainState(1, hs, n), 0, [], CONTINUE, "hold"))
        else:
            out.append(_t(KIND_MP, "", 1.0, FRESH, 1, [Credit(MP, SETTLED)], WIN, "publish(1)"))
    elif mark == "''":
        out.append(_t(KIND_MP, "", 1.0, FRESH, 1, [Credit(MP, SETTLED)], WIN, "publish(1)"))
    else:  # delta == -1
        out.append(_t(KIND_MP, "", 1.0, trail_tie(hs, n), 1, [Credit(MP, PRIVATE)], CONTINUE,
                      "publish(1)"))

    # -- honest pools -----------------------------------------------------
    if state.fresh:
        out.append(_t(KIND_HP1, "pub", 1.0, FRESH, 0, [Credit(HP, SETTLED)], CONTINUE,
                      "mine-on-new-block"))
        # two new public subtrees; the attacker adopts one of them
        out.append(_t(KIND_HP2, "H", 1.0, tie(1, 2), 0,
                      [Credit(HP, PRIVATE), Credit(HP, PUBLIC)], CONTINUE, "adopt-public"))
        return out

    if hs == 0:  # hidden lead, honest pools mine on the consensus block
        nxt, k, fate, cr, act = _react(d, d, 1, 1, 1, 1, strategy, False)
        out.append(_t(KIND_HP1, "pub", 1.0, nxt, k, cr, fate, act))
        nxt, k, fate, cr, act = _react(d, d, 1, 2, 2, 2, strategy, True)
        out.append(_t(KIND_HP2, "H", 1.0, nxt, k, cr, fate, act))
        return out

    if state.trailing:
        out.extend(_trailing_hp(state))
        return out

    # tie-visible states: one private leaf plus n-1 public leaves
    dn = d  # 0' counts as 0
    withheld = d
    ell2 = hs == 1 and n == 3  # single public subtree with two sibling tips
    g = 1.0 / n

    # single honest block on the private frontier
    if d == 0:
        out.append(_t(KIND_HP1, "pri", g, FRESH, 0, [Credit(HP, SETTLED)], WIN,
                      "mine-on-new-block"))
    else:
        nxt, k, _, cr, act = _react(dn, withheld, 1, 1, 1, 1, strategy, False)
        out.append(_t(KIND_HP1, "pri", g, nxt, k, cr, WIN, act))
    # single honest block on a public leaf
    nxt, k, fate, cr, act = _react(dn, withheld, 1, 1, 1, 1, strategy, False)
    out.append(_t(KIND_HP1, "pub", 1.0 - g, nxt, k, cr, fate, act))

    # two honest blocks
    w_a = g * g
    w_ah = 2 * g * (1 - g)
    if d == 0:
        out.append(_t(KIND_HP2, "A", w_a, tie(1, 2), 0,
                      [Credit(HP, PRIVATE), Credit(HP, PUBLIC)], WIN, "adopt-public"))
        out.append(_t(KIND_HP2, "AH", w_ah, tie(1, 2), 0,
                      [Credit(HP, PRIVATE), Credit(HP, PUBLIC)], CONTINUE, "mine-on-new-block"))
    else:
        nxt, k, _, cr, act = _react(dn, withheld, 1, 2, 2, 2, strategy, True)
        out.append(_t(KIND_HP2, "A", w_a, nxt, k, cr, WIN, act))
        nxt, k, _, cr, act = _react(dn, withheld, 1, 1, 1, 1, strategy, False)
        cr = tuple(cr) + (Credit(HP, DEAD),)
        out.append(_t(KIND_HP2, "AH", w_ah, nxt, k, cr, WIN, act))

    if n == 2:
        # both on the single public leaf: siblings, public side gains 2
        nxt, k, fate, cr, act = _react(dn, withheld, 2, 1, 2, 2, strategy, True)
        out.append(_t(KIND_HP2, "H", g * g, nxt, k, cr, fate, act))
    else:
        # H1: both on one public leaf
        nxt, k, fate, cr, act = _react(dn, withheld, 2, 1, 2, 2, strategy, True)
        out.append(_t(KIND_HP2, "H1", 2 * g * g, nxt, k, cr, fate, act))
        # H2: two different public leaves
        if ell2:
            nxt, k, fate, cr, act = _react(dn, withheld, 2, 1, 2, 2, strategy, True)
        else:
            nxt, k, fate, cr, act = _react(dn, withheld, 1, 2, 2, 2, strategy, True)
        out.append(_t(KIND_HP2, "H2", 2 * g * g, nxt, k, cr, fate, act))
    return out


def _trailing_hp(state: ChainState) -> list[Transition]:
    d, hs, n, _ = state
    adopt = [Credit(HP, PRIVATE), Credit(HP, PUBLIC)]
    if d == -1:
        return [
            _t(KIND_HP1, "pub", 1.0, FRESH, 0, [Credit(HP, SETTLED)], LOSE, "adopt-public"),
            _t(KIND_HP2, "H", 1.0, tie(1, 2), 0, adopt, LOSE, "adopt-public"),
        ]
    out = [_t(KIND_HP1, "pub", 1.0, ChainState(-1, 1, 1), 0, [Credit(HP, PUBLIC)], CONTINUE,
              "mine-private")]
    if hs == 2:
        out.append(_t(KIND_HP2, "H1", 0.5, tie(1, 2), 0, adopt, LOSE, "adopt-public"))
        out.append(_t(KIND_HP2, "H2", 0.5, ChainState(-1, 2, 2), 0,
                      [Credit(HP, PUBLIC, 2, 0.5)], CONTINUE, "mine-private"))
    else:
        out.append(_t(KIND_HP2, "H", 1.0, tie(1, 2), 0, adopt, LOSE, "adopt-public"))
    return out


def attacker_action(state: ChainState, event: BlockEvent, strategy: Strategy) -> str:
    """Attacker's response to ``event`` in ``state``.

    One of ``hold``, ``publish(k)``, ``adopt-public``, ``mine-private`` or
    ``mine-on-new-block``.
    """
    for tr in successors(state, strategy, delta_max=max(state.delta + 1, 2)):
        if tr.event == event:
            return tr.action
    raise ValueError(f"event {event} infeasible in state {state}")


def with_rates(transitions, rates: DerivedRates, convention: str = "unified-embedded"):
    """Attach per-unit-time rates and embedded probabilities."""
    kind_rate = dict(zip((KIND_MP, KIND_HP1, KIND_HP2), rates.generator_rates(convention)))
    kind_prob = dict(zip((KIND_MP, KIND_HP1, KIND_HP2), rates.event_probs()))
    out = []
    for tr in transitions:
        k = tr.event.kind
        out.append(Transition(tr.event, tr.weight, tr.next, tr.mp_published, tr.credits,
                              tr.fate, tr.action, tr.truncated,
                              rate=kind_rate[k] * tr.weight, prob=kind_prob[k] * tr.weight))
    return out


@dataclass(frozen=True)
class StateSpace:
    states: tuple
    transitions: tuple  # per state, tuple of Transition
    strategy: Strategy
    delta_max: int
    rates: DerivedRates | None = None
    convention: str = "unified-embedded"
    honest: bool = False

    @property
    def initial(self) -> int:
        return self.index[FRESH]

    @property
    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def dump(self) -> str:
        """Human-readable adjacency listing for audits."""
        buf = io.StringIO()
        buf.write(f"# strategy={self.strategy.name} delta_max={self.delta_max}\n")
        for s, trs in zip(self.states, self.transitions):
            for tr in trs:
                if tr.truncated:
                    continue
                kind = {KIND_MP: "alpha", KIND_HP1: "beta1", KIND_HP2: "beta2"}[tr.event.kind]
                expr = kind if tr.weight == 1.0 else f"{kind}*{tr.weight:.6g}"
                buf.write(f"{s.label():<12} {str(tr.event):<12} {expr:<16} -> "
                          f"{tr.next.label():<12} publish={tr.mp_published} fate={tr.fate}\n")
        return buf.getvalue()


def enumerate_reachable(strategy: Strategy, rates: DerivedRates | None = None,
                        delta_max: int = 60, convention: str = "unified-embedded",
                        honest: bool = False) -> StateSpace:
    """Breadth-first closure of ``successors`` from the fresh state."""
    if delta_max < 4:
        raise ValueError("delta_max must be >= 4")
    order = [FRESH]
    seen = {FRESH}
    queue = deque(order)
    trans = {}
    while queue:
        s = queue.popleft()
        trs = successors(s, strategy, delta_max, honest)
        if rates is not None:
            # zero-probability arcs (theta = 0) would reach unreachable states
            trs = [tr for tr in with_rates(trs, rates, convention)
                   if tr.prob > 0.0 or tr.truncated]
        trans[s] = tuple(trs)
        for tr in trs:
            if tr.next not in seen:
                seen.add(tr.next)
                order.append(tr.next)
                queue.append(tr.next)
    states = tuple(sorted(order, key=_sort_key))
    return StateSpace(states, tuple(trans[s] for s in states), strategy, delta_max, rates,
                      convention, honest)


def _sort_key(s: ChainState):
    rank = {"": 0, "'": 1, "''": 2}[s.mark]
    return (s.delta if s.delta != 0 else (0 if rank == 0 else -0.5 + 0.1 * rank), s.hs, s.n)
