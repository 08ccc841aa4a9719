"""Point evaluation, grid sweeps, analytic/simulation comparison and output."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .metrics import CSV_FIELDS, RevenueReport, analyze
from .params import STRATEGY_ORDER, Strategy, SystemParams
from .simulator import MIN_TARGET, run_rounds

MODES = ("analytic", "sim", "both")
PAPER_THETAS = (0.005, 0.01, 0.05, 0.1, 0.2)


class ConfigError(ValueError):
    pass


class CompareKeyError(KeyError):
    pass


class PointError(RuntimeError):
    """A pipeline failure tagged with the parameter point that caused it."""

    def __init__(self, point, cause):
        super().__init__(f"{point}: {cause}")
        self.point = point
        self.cause = cause


def alpha_grid(lo=0.05, hi=0.45, step=0.02) -> tuple:
    n = int(round((hi - lo) / step))
    return tuple(round(lo + k * step, 10) for k in range(n + 1))


def _preset(thetas, alphas=None):
    return {"strategies": STRATEGY_ORDER, "alphas": alphas or alpha_grid(),
            "thetas": tuple(thetas)}


# fig5: relative revenue, fig6: throughput, fig7: hazard index; a/b/c = theta
FIGURE_PRESETS = {
    f"fig{n}{c}": _preset([th]) for n in (5, 6, 7)
    for c, th in zip("abc", (0.005, 0.05, 0.2))
}
FIGURE_PRESETS["fig5"] = FIGURE_PRESETS["fig6"] = FIGURE_PRESETS["fig7"] = _preset(
    (0.005, 0.05, 0.2))
FIGURE_PRESETS["full"] = _preset(PAPER_THETAS)
FIGURE_PRESETS["crossval"] = _preset((0.005, 0.05, 0.2), (0.05, 0.15, 0.25, 0.35, 0.45))
FIGURE_PRESETS["classic"] = {"strategies": ("S",),
                             "alphas": tuple(round(0.1 + 0.05 * k, 2) for k in range(8)),
                             "thetas": (1e-6,)}


@dataclass
class SweepConfig:
    strategies: tuple = STRATEGY_ORDER
    alphas: tuple = (0.3,)
    thetas: tuple = (0.005,)
    mode: str = "analytic"
    delta_max: int = 150
    tol: float = 1e-12
    rounds: int = 10
    blocks: int = 1_000_000
    seed: int = 0
    rate_convention: str = "unified-embedded"
    credit_rule: str = "subtree-of-residence"
    unsafe_params: bool = False
    workers: int = 1

    def __post_init__(self):
        self.strategies = tuple(self.strategies)
        self.alphas = tuple(float(a) for a in self.alphas)
        self.thetas = tuple(float(t) for t in self.thetas)

    def validate(self) -> "SweepConfig":
        if not self.strategies:
            raise ConfigError("strategy list is empty")
        if not self.alphas or not self.thetas:
            raise ConfigError("alpha and theta grids must be nonempty")
        for s in self.strategies:
            Strategy.from_name(s)
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.unsafe_params and any(not 0.0 < a < 1.0 for a in self.alphas):
            raise ConfigError("alpha grid must lie in (0, 1)")
        if self.rounds < 2 or self.blocks < MIN_TARGET:
            raise ConfigError(f"need rounds >= 2 and blocks >= {MIN_TARGET}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        # domain checks of every point up front
        for p in self.points():
            self.params(*p)
        return self

    def points(self) -> list:
        return [(s, a, t) for s in self.strategies for t in self.thetas for a in self.alphas]

    def params(self, strategy, alpha, theta) -> SystemParams:
        return SystemParams(alpha, theta, Strategy.from_name(strategy), self.rate_convention,
                            self.credit_rule, self.unsafe_params)

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "SweepConfig":
        if name not in FIGURE_PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(FIGURE_PRESETS)}")
        return cls(**{**FIGURE_PRESETS[name], **overrides})


def _sim_report(params: SystemParams, cfg: SweepConfig) -> RevenueReport:
    agg = run_rounds(params, cfg.rounds, cfg.blocks, cfg.seed)
    rr = agg.rr_m
    hi = (rr - params.alpha) / params.alpha if params.alpha > 0 else math.nan
    return RevenueReport(params.strategy.name, params.alpha, params.theta, rr, 1.0 - rr,
                         agg.tps, hi, rr * agg.tps, (1.0 - rr) * agg.tps, "sim", 0.0,
                         agg.rr_m_stderr)


def run_point(strategy: str, alpha: float, theta: float, cfg: SweepConfig) -> list:
    """Evaluate one point; returns one report per requested source."""
    point = (strategy, alpha, theta)
    try:
        params = cfg.params(*point)
        out = []
        if cfg.mode in ("analytic", "both"):
            out.append(analyze(params, cfg.delta_max, cfg.tol))
        if cfg.mode in ("sim", "both"):
            out.append(_sim_report(params, cfg))
        return out
    except Exception as exc:  # noqa: BLE001 - re-raised with the point attached
        raise PointError(point, exc) from exc


def _failed_row(point, source, exc) -> RevenueReport:
    s, a, t = point
    nan = math.nan
    return RevenueReport(s, a, t, nan, nan, nan, nan, nan, nan, f"failed:{source}", nan, nan)


def _run_one(args):
    point, cfg = args
    try:
        return point, run_point(*point, cfg), None
    except PointError as exc:
        return point, None, str(exc)


def run_sweep(cfg: SweepConfig) -> tuple[list, list]:
    """All points of ``cfg``; returns ``(rows, errors)``.

    Failed points produce a ``failed:<mode>`` row and an entry in ``errors``;
    the sweep carries on.  Row order is fixed: strategy order, then theta,
    then alpha, then source.
    """
    cfg.validate()
    jobs = [(p, cfg) for p in cfg.points()]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    rows, errors = [], []
    for point, reports, err in results:
        if err is None:
            rows.extend(reports)
        else:
            rows.append(_failed_row(point, cfg.mode, err))
            errors.append(err)
    order = {s: i for i, s in enumerate(STRATEGY_ORDER)}
    rows.sort(key=lambda r: (order.get(r.strategy, 99), r.theta, r.alpha, r.source))
    return rows, errors


# -- comparison ---------------------------------------------------------------


@dataclass
class CompareReport:
    diffs: dict
    threshold: float
    failures: list = field(default_factory=list)

    @property
    def max_diff(self) -> float:
        return max(self.diffs.values(), default=0.0)

    @property
    def mean_diff(self) -> float:
        return sum(self.diffs.values()) / len(self.diffs) if self.diffs else 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        lines = [f"points={len(self.diffs)} max|d rr_m|={self.max_diff:.6f} "
                 f"mean|d rr_m|={self.mean_diff:.6f} threshold={self.threshold}"]
        for key in self.failures:
            s, a, t = key
            lines.append(f"DIVERGED strategy={s} alpha={a} theta={t} "
                         f"|d rr_m|={self.diffs[key]:.6f}")
        return "\n".join(lines)


def _key(row):
    if isinstance(row, RevenueReport):
        row = row.to_row()
    return (str(row["strategy"]), float(row["alpha"]), float(row["theta"]))


def _rr(row):
    return float(row.rr_m if isinstance(row, RevenueReport) else row["rr_m"])


def compare(analytic_rows, sim_rows, threshold: float = 0.01) -> CompareReport:
    """Per-point |rr_m| differences; points over ``threshold`` are failures."""
    a = {_key(r): _rr(r) for r in analytic_rows}
    s = {_key(r): _rr(r) for r in sim_rows}
    if a.keys() != s.keys():
        missing = sorted(a.keys() ^ s.keys())
        raise CompareKeyError(f"row keys differ: {missing[:5]}")
    diffs = {k: abs(a[k] - s[k]) for k in sorted(a)}
    bad = [k for k, d in diffs.items() if not d <= threshold]
    return CompareReport(diffs, threshold, bad)


def split_sources(rows) -> tuple[list, list]:
    an = [r for r in rows if _source(r) == "analytic"]
    sim = [r for r in rows if _source(r) == "sim"]
    return an, sim


def _source(row):
    return row.source if isinstance(row, RevenueReport) else row["source"]


# -- output -------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        d = r.to_row() if isinstance(r, RevenueReport) else r
        w.writerow([_fmt(d[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def to_json(rows) -> str:
    data = [r.to_row() if isinstance(r, RevenueReport) else dict(r) for r in rows]
    for d in data:
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != CSV_FIELDS:
        raise ValueError(f"{path}: unexpected header {list(rows[0].keys())}")
    return rows


def to_svg(rows, metric: str = "rr_m", width: int = 640, height: int = 400) -> str:
    """Bare-bones line chart of ``metric`` against alpha, one line per strategy."""
    series = {}
    for r in rows:
        d = r.to_row() if isinstance(r, RevenueReport) else r
        y = float(d[metric])
        if math.isfinite(y):
            series.setdefault((d["strategy"], d["theta"], d["source"]), []).append(
                (float(d["alpha"]), y))
    if not series:
        raise ValueError("nothing to plot")
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y0, y1 = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1
    pad = 40

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
               "#e377c2", "#7f7f7f"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{pad}" y="20" font-size="12">{metric} vs alpha '
           f'[{y0:.3g}, {y1:.3g}]</text>']
    for i, (key, pts) in enumerate(sorted(series.items())):
        pts.sort()
        colour = palette[i % len(palette)]
        path = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" points="{path}"/>')
        lx, ly = pts[-1]
        out.append(f'<text x="{sx(lx) + 2:.1f}" y="{sy(ly):.1f}" font-size="9" '
                   f'fill="{colour}">{key[0]} {key[1]}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = ["SweepConfig", "FIGURE_PRESETS", "ConfigError", "CompareKeyError", "PointError",
           "CompareReport", "alpha_grid", "run_point", "run_sweep", "compare", "split_sources",
           "to_csv", "to_json", "read_csv", "to_svg"]
