"""Command-line front end.

Every flag can also be set through an environment variable named
``STUBBORN_GHOST_<FLAG>`` (upper case, dashes as underscores), e.g.
``STUBBORN_GHOST_ALPHA=0.3``.  Flags given on the command line win.

Exit status: 0 on success, 1 on failed points, 2 on bad arguments or
parameters, 3 when analytic and simulated ``rr_m`` diverge beyond
``--threshold``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .params import CREDIT_RULES, RATE_CONVENTIONS, ParameterDomainError
from .sweep import (FIGURE_PRESETS, MODES, ConfigError, SweepConfig, compare, read_csv,
                    run_sweep, split_sources, to_csv, to_json, to_svg)

ENV_PREFIX = "STUBBORN_GHOST_"


def _floats(text: str) -> tuple:
    """``0.3``, ``0.1,0.2`` or ``lo:hi:step``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            lo, hi, step = (float(x) for x in part.split(":"))
            n = int(round((hi - lo) / step))
            out.extend(round(lo + k * step, 10) for k in range(n + 1))
        else:
            out.append(float(part))
    return tuple(out)


def _strategies(text: str) -> tuple:
    return tuple(s.strip().upper() for s in text.split(",") if s.strip())


def _bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stubborn-ghost",
        description="Relative revenue, throughput and hazard index of withholding "
                    "strategies under GHOST: analytic chain and Monte Carlo simulator.")
    p.add_argument("--strategy", type=_strategies,
                   help="comma list of S,L,F,T,LF,LT,FT,LFT (default: all)")
    p.add_argument("--alpha", type=_floats, help="attacker power: values or lo:hi:step")
    p.add_argument("--theta", type=_floats, help="fork probability: values or lo:hi:step")
    p.add_argument("--mode", choices=MODES, help="analytic, sim or both (default analytic)")
    p.add_argument("--delta-max", type=int, help="lead truncation (default 150)")
    p.add_argument("--tol", type=float, help="solver tolerance (default 1e-12)")
    p.add_argument("--rounds", type=int, help="simulation rounds (default 10)")
    p.add_argument("--blocks", type=int, help="main blocks per round (default 1e6)")
    p.add_argument("--seed", type=int, help="base seed; round r uses seed + r")
    p.add_argument("--figure", choices=sorted(FIGURE_PRESETS), help="grid preset")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    p.add_argument("--rate-convention", choices=RATE_CONVENTIONS)
    p.add_argument("--credit-rule", choices=CREDIT_RULES)
    p.add_argument("--unsafe-params", action="store_const", const=True, default=None,
                   help="allow alpha outside [0.05, 0.45]")
    p.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    p.add_argument("--threshold", type=float, help="divergence threshold (default 0.01)")
    p.add_argument("--compare", nargs=2, metavar=("ANALYTIC_CSV", "SIM_CSV"),
                   help="compare two CSV files instead of running a sweep")
    p.add_argument("--svg", help="also write a quick line chart of rr_m to this path")
    return p


_ENV_TYPES = {
    "strategy": _strategies, "alpha": _floats, "theta": _floats, "mode": str,
    "delta_max": int, "tol": float, "rounds": int, "blocks": int, "seed": int,
    "figure": str, "out": str, "format": str, "rate_convention": str, "credit_rule": str,
    "unsafe_params": _bool, "workers": int, "threshold": float, "svg": str,
}


def apply_env(ns: argparse.Namespace, environ=None) -> argparse.Namespace:
    """Fill unset options from ``STUBBORN_GHOST_*`` variables."""
    environ = os.environ if environ is None else environ
    for name, conv in _ENV_TYPES.items():
        if getattr(ns, name, None) is None:
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                setattr(ns, name, conv(raw))
    return ns


def config_from_args(ns: argparse.Namespace) -> SweepConfig:
    cfg = SweepConfig.from_preset(ns.figure) if ns.figure else SweepConfig()
    mapping = {"strategy": "strategies", "alpha": "alphas", "theta": "thetas",
               "mode": "mode", "delta_max": "delta_max", "tol": "tol", "rounds": "rounds",
               "blocks": "blocks", "seed": "seed", "rate_convention": "rate_convention",
               "credit_rule": "credit_rule", "unsafe_params": "unsafe_params",
               "workers": "workers"}
    changes = {dst: getattr(ns, src) for src, dst in mapping.items()
               if getattr(ns, src, None) is not None}
    return replace(cfg, **changes)


def _emit(text: str, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    ns = apply_env(parser.parse_args(argv))
    threshold = 0.01 if ns.threshold is None else ns.threshold

    if ns.compare:
        rep = compare(read_csv(ns.compare[0]), read_csv(ns.compare[1]), threshold)
        print(rep.summary())
        return 0 if rep.ok else 3

    try:
        cfg = config_from_args(ns).validate()
    except (ConfigError, ParameterDomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rows, errors = run_sweep(cfg)
    fmt = ns.format or "csv"
    _emit(to_csv(rows) if fmt == "csv" else to_json(rows), ns.out)
    if ns.svg:
        _emit(to_svg(rows), ns.svg)
    for err in errors:
        print(f"failed: {err}", file=sys.stderr)
    status = 1 if errors else 0
    if cfg.mode == "both" and not errors:
        rep = compare(*split_sources(rows), threshold)
        print(rep.summary(), file=sys.stderr)
        if not rep.ok:
            status = 3
    return status


if __name__ == "__main__":
    sys.exit(main())
