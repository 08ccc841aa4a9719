"""Revenue, relative revenue, throughput and hazard index."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .params import SystemParams, derive_rates
from .selection import SelectionTable, solve_selection
from .state_space import DEAD, HP, MP, PRIVATE, PUBLIC, SETTLED, StateSpace, enumerate_reachable
from .steady_state import StationaryDist, build_generator, solve_stationary

CSV_FIELDS = ("strategy", "alpha", "theta", "rr_m", "rr_h", "tps", "hi", "e_m", "e_h",
              "source", "residual", "stderr")


class ProvenanceError(ValueError):
    pass


def _credit_value(credit, owner_rule: str, p_a: float) -> float:
    role = credit.role
    if role == SETTLED:
        return credit.count
    if role == DEAD:
        return 0.0
    if role == PRIVATE:
        # an honest block sitting on the private subtree lives or dies with it
        if credit.owner == HP and owner_rule == "owner-side-literal":
            return credit.count * credit.share * (1.0 - p_a)
        return credit.count * credit.share * p_a
    if role == PUBLIC:
        return credit.count * credit.share * (1.0 - p_a)
    raise ValueError(f"unknown credit role {role!r}")


def expected_revenues(pi: StationaryDist, sel: SelectionTable, space: StateSpace,
                      credit_rule: str = "subtree-of-residence") -> tuple[float, float]:
    """Expected reward per unit time of the attacker and of honest pools.

    Sum over states of ``pi`` times, over events, the event rate times the
    win probability of every block the event publishes, evaluated in the
    post-event state.
    """
    if pi.space is not space or sel.delta_max != space.delta_max:
        raise ProvenanceError("stationary distribution / selection table built for another space")
    sel_idx = sel.index
    e = {MP: 0.0, HP: 0.0}
    for p, trs in zip(pi.pi, space.transitions):
        if p == 0.0:
            continue
        for tr in trs:
            if tr.truncated or not tr.credits:
                continue
            p_a = sel.p_a[sel_idx[tr.next]] if not tr.next.fresh else float("nan")
            for c in tr.credits:
                e[c.owner] += p * tr.rate * _credit_value(c, credit_rule, p_a)
    return e[MP], e[HP]


def relative_revenue(e_m: float, e_h: float) -> tuple[float, float]:
    total = e_m + e_h
    if total <= 0.0:
        raise ZeroDivisionError("total revenue is zero")
    rr_m = e_m / total
    return rr_m, 1.0 - rr_m


def tps(e_m: float, e_h: float) -> float:
    """Main blocks per unit time (one transaction per block, block rate 1)."""
    return e_m + e_h


def hazard_index(rr_m: float, alpha: float) -> float:
    """Extra relative revenue per unit of computing power."""
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return (rr_m - alpha) / alpha


@dataclass
class RevenueReport:
    strategy: str
    alpha: float
    theta: float
    rr_m: float
    rr_h: float
    tps: float
    hi: float
    e_m: float
    e_h: float
    source: str = "analytic"
    residual: float = 0.0
    stderr: float = 0.0

    def to_row(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k in CSV_FIELDS}


def analyze(params: SystemParams, delta_max: int = 150, tol: float = 1e-12,
            honest: bool = False) -> RevenueReport:
    """Full analytic pipeline for one parameter point."""
    rates = derive_rates(params)
    space = enumerate_reachable(params.strategy, rates, delta_max, params.rate_convention,
                                honest=honest)
    pi = solve_stationary(build_generator(space), tol=tol)
    sel = solve_selection(space, rates, tol=tol)
    e_m, e_h = (float(x) for x in expected_revenues(pi, sel, space, params.credit_rule))
    rr_m, rr_h = relative_revenue(e_m, e_h)
    hi = hazard_index(rr_m, params.alpha) if params.alpha > 0 else float("nan")
    return RevenueReport(params.strategy.name, params.alpha, params.theta, rr_m, rr_h,
                         tps(e_m, e_h), hi, e_m, e_h, "analytic",
                         float(max(pi.residual, sel.residual)), 0.0)


def selfish_closed_form(alpha: float, gamma: float = 0.5) -> float:
    """Classic zero-delay selfish-mining relative revenue."""
    a = alpha
    num = a * (1 - a) ** 2 * (4 * a + gamma * (1 - 2 * a)) - a ** 3
    return num / (1 - a * (1 + (2 - a) * a))


__all__ = ["expected_revenues", "relative_revenue", "tps", "hazard_index", "RevenueReport",
           "analyze", "selfish_closed_form", "CSV_FIELDS", "ProvenanceError"]
