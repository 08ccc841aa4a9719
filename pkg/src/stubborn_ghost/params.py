"""Exogenous parameters and every derived rate / placement probability."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

RATE_CONVENTIONS = ("unified-embedded", "paper-literal")
CREDIT_RULES = ("subtree-of-residence", "owner-side-literal")

SAFE_ALPHA = (0.05, 0.45)


class ParameterDomainError(ValueError):
    """Raised when a parameter point falls outside the supported domain."""


@dataclass(frozen=True)
class Strategy:
    """Attacker strategy flags: Lead, equal-Fork, Trail.

    All zero is plain selfish mining (preset ``S``).
    """

    L: int = 0
    F: int = 0
    T: int = 0

    def __post_init__(self):
        for flag in (self.L, self.F, self.T):
            if flag not in (0, 1):
                raise ValueError(f"strategy flags must be 0 or 1, got {self}")

    @property
    def name(self) -> str:
        letters = "".join(c for c, f in zip("LFT", (self.L, self.F, self.T)) if f)
        return letters or "S"

    @classmethod
    def from_name(cls, name: str) -> "Strategy":
        key = name.strip().upper()
        if key not in PRESETS:
            raise ValueError(f"unknown strategy {name!r}; expected one of {list(PRESETS)}")
        return PRESETS[key]

    def __str__(self) -> str:
        return self.name


PRESETS = {
    s.name: s
    for s in (Strategy(L, F, T) for L in (0, 1) for F in (0, 1) for T in (0, 1))
}
# stable presentation order used by sweeps and reports
STRATEGY_ORDER = ("S", "L", "F", "T", "LF", "LT", "FT", "LFT")


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    theta: float
    strategy: Strategy = field(default_factory=Strategy)
    rate_convention: str = "unified-embedded"
    credit_rule: str = "subtree-of-residence"
    unsafe_params: bool = False

    def __post_init__(self):
        if isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", Strategy.from_name(self.strategy))
        if self.rate_convention not in RATE_CONVENTIONS:
            raise ParameterDomainError(f"rate_convention must be one of {RATE_CONVENTIONS}")
        if self.credit_rule not in CREDIT_RULES:
            raise ParameterDomainError(f"credit_rule must be one of {CREDIT_RULES}")
        lo, hi = SAFE_ALPHA
        if self.unsafe_params:
            if not 0.0 <= self.alpha < 1.0:
                raise ParameterDomainError(f"alpha={self.alpha} outside [0, 1)")
        elif not lo <= self.alpha <= hi:
            raise ParameterDomainError(
                f"alpha={self.alpha} outside [{lo}, {hi}]; pass --unsafe-params to override"
            )
        if not 0.0 <= self.theta < 0.5:
            raise ParameterDomainError(f"theta={self.theta} outside [0, 0.5)")

    @property
    def beta(self) -> float:
        return 1.0 - self.alpha


@dataclass(frozen=True)
class DerivedRates:
    """Rates and embedded probabilities of the three block-generation events.

    ``beta1``/``beta2`` are the per-unit-time rates of single and double
    honest events (total block rate normalized to 1); ``p_beta1`` is the
    probability that an event is a single honest block.
    """

    alpha: float
    beta: float
    beta2: float
    beta1: float
    p_beta1: float
    r1: float

    def event_probs(self) -> tuple[float, float, float]:
        """Embedded (per-event) probabilities of MP, HP-one, HP-two."""
        return self.alpha, self.p_beta1, self.beta2

    def generator_rates(self, convention: str = "unified-embedded") -> tuple[float, float, float]:
        """Per-unit-time rates of MP, HP-one, HP-two events.

        Both conventions produce one block per unit time on average.
        ``paper-literal`` uses ``beta1 = beta - 2*beta2`` for the single-block
        arcs; ``unified-embedded`` scales the embedded probabilities by the
        event rate ``1 / (1 + beta2)``.
        """
        if convention == "paper-literal":
            return self.alpha, self.beta1, self.beta2
        if convention == "unified-embedded":
            lam = 1.0 / (1.0 + self.beta2)
            return self.alpha * lam, self.p_beta1 * lam, self.beta2 * lam
        raise ParameterDomainError(f"unknown rate convention {convention!r}")


def derive_rates(params: SystemParams) -> DerivedRates:
    if params.theta >= 0.5:
        raise ParameterDomainError(f"theta={params.theta} must be < 0.5")
    beta = 1.0 - params.alpha
    beta2 = beta * params.theta
    return DerivedRates(
        alpha=params.alpha,
        beta=beta,
        beta2=beta2,
        beta1=beta - 2.0 * beta2,
        p_beta1=beta * (1.0 - params.theta),
        r1=1.0 - 2.0 * beta2,
    )


def gamma(n: int) -> float:
    """Probability that a single honest block lands on one given leaf out of ``n``."""
    if n not in (1, 2, 3):
        raise ValueError(f"leaf count must be in 1..3, got {n}")
    return 1.0 / n


@dataclass(frozen=True)
class PlacementDist:
    """Placement coefficients for a two-block honest fork over ``n`` leaves.

    Keys: ``A`` both on the private leaf, ``AH`` one private one public,
    ``H`` both public (``N=2``), split into ``H1`` (same public leaf) and
    ``H2`` (two different public leaves) for ``N=3``.
    """

    n: int
    masses: dict

    def __getitem__(self, key):
        return self.masses[key]

    def total(self) -> float:
        return sum(self.masses.values())


def fork_placement(n: int, exact: bool = False) -> PlacementDist:
    """Fork-category distribution for ``n`` in {2, 3} leaves (one private)."""
    if n == 1:
        raise ValueError("n=1 is the fresh-consensus fork: both blocks start new public subtrees")
    if n not in (2, 3):
        raise ValueError(f"fork placement defined for n in (2, 3), got {n}")
    g = Fraction(1, n) if exact else gamma(n)
    a, ah, h = g * g, 2 * g * (1 - g), (1 - g) ** 2
    if n == 2:
        return PlacementDist(2, {"A": a, "AH": ah, "H": h})
    return PlacementDist(3, {"A": a, "AH": ah, "H1": h / 2, "H2": h / 2})


_CONFIG_KEYS = {"alpha", "theta", "strategy", "rate_convention", "credit_rule", "unsafe_params"}


def load_params(path: str | os.PathLike) -> SystemParams:
    """Read a flat ``key = value`` (or ``key: value``) config file."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split(sep, 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    kwargs = {}
    for key, value in values.items():
        if key in ("alpha", "theta"):
            kwargs[key] = float(value)
        elif key == "unsafe_params":
            kwargs[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            kwargs[key] = value
    return SystemParams(**kwargs)
