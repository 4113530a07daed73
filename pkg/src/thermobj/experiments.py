"""Seeded Monte Carlo sweeps of the deviation and macrofraction bounds, with CSV/SVG output.

Every trial draws from its own Philox stream whose counter encodes the
trial coordinates, so results never depend on execution order.  Sigma-sweep
streams are keyed by (grid index, trial).  Macrofraction streams are keyed
by (subenvironment, trial), so trial t at size N uses the same first N
subenvironments as at any larger size (nested macrofractions).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import DeviationModel, deviation_bound, grouped_greedy_prefix_totals, macrofraction_bound
from .textio import floats, parse_key_values

KINDS = ("sigma_sweep", "macrofraction_sweep")
CSV_HEADER = "grid_value,mean,stderr,variant,trials,beta,seed"
_SIGMA_STREAM, _MACRO_STREAM = 0, 1


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    grid: tuple[float, ...]
    beta: float = 1.0
    d_S: int = 2
    d_E: int = 2
    trials: int = 1000
    sigma: float = 0.05
    energies: tuple[float, ...] = (0.0, 1.0)
    seed: int = 20220101
    variants: tuple[str, ...] = ("grouped_greedy", "product_form", "as_printed")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        grid = tuple(float(g) for g in self.grid)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        object.__setattr__(self, "variants", tuple(self.variants))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be nonempty and strictly increasing")
        if len(self.energies) != self.d_S:
            raise ValueError(f"{len(self.energies)} base energies for d_S={self.d_S}")
        if self.d_E != self.d_S:
            raise ValueError("deviation sweeps pair each environment level with a system level (d_E = d_S)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.kind == "macrofraction_sweep":
            if any(g < 1 or g != int(g) for g in grid):
                raise ValueError("macrofraction grid values are positive integers N_E")
            if not self.variants:
                raise ValueError("need at least one variant")
        elif any(g < 0 for g in grid):
            raise ValueError("sigma grid must be nonnegative")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kv = parse_key_values(text)
        kwargs: dict = {}
        for key, value in kv.items():
            if key in ("grid", "energies"):
                kwargs[key] = tuple(floats(value))
            elif key == "variants":
                kwargs[key] = tuple(v for v in value.replace(",", " ").split())
            elif key in ("d_S", "d_E", "trials", "seed"):
                kwargs[key] = int(value)
            elif key in ("beta", "sigma"):
                kwargs[key] = float(value)
            elif key == "kind":
                kwargs[key] = value
            else:
                raise ValueError(f"unknown config key {key!r}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, (tuple, list)):
                value = " ".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TrialRecord:
    grid_value: float
    trial: int
    deviations: tuple[tuple[float, ...], ...]
    bound: float
    variant: str = "deviation"

    def __post_init__(self):
        if not self.bound >= 0:
            raise ValueError("bound must be >= 0")


@dataclass(frozen=True)
class SweepRow:
    grid_value: float
    mean: float
    stderr: float
    variant: str
    trials: int


@dataclass
class SweepTable:
    config: ExperimentConfig
    rows: list[SweepRow]
    records: list[TrialRecord] = field(default_factory=list, repr=False)

    def variant_rows(self, variant: str) -> list[SweepRow]:
        return [r for r in self.rows if r.variant == variant]

    def means(self, variant: str | None = None) -> np.ndarray:
        variant = variant or self.rows[0].variant
        return np.array([r.mean for r in self.variant_rows(variant)])

    def stderrs(self, variant: str | None = None) -> np.ndarray:
        variant = variant or self.rows[0].variant
        return np.array([r.stderr for r in self.variant_rows(variant)])


def trial_rng(seed: int, a: int, b: int, stream: int) -> np.random.Generator:
    """Counter-based stream; only counter word 0 advances while drawing."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, a, b, stream]))


def _summarise(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return mean, se


def _sigma_point(cfg: ExperimentConfig, gi: int) -> list[TrialRecord]:
    sigma = cfg.grid[gi]
    out = []
    for t in range(cfg.trials):
        delta = sigma * trial_rng(cfg.seed, gi, t, _SIGMA_STREAM).standard_normal(cfg.d_S)
        model = DeviationModel(cfg.energies, 0.0, delta, cfg.beta)
        out.append(TrialRecord(sigma, t, (tuple(delta.tolist()),), deviation_bound(model)))
    return out


def macrofraction_deviations(cfg: ExperimentConfig, trial: int, n_envs: int) -> np.ndarray:
    return np.array([
        cfg.sigma * trial_rng(cfg.seed, k, trial, _MACRO_STREAM).standard_normal(cfg.d_S)
        for k in range(n_envs)
    ])


def _macro_trial(cfg: ExperimentConfig, t: int) -> list[TrialRecord]:
    sizes = [int(g) for g in cfg.grid]
    delta = macrofraction_deviations(cfg, t, max(sizes))
    models = [DeviationModel(cfg.energies, 0.0, d, cfg.beta) for d in delta]
    out = []
    prefix = None
    if "grouped_greedy" in cfg.variants:
        prefix = np.minimum.accumulate(grouped_greedy_prefix_totals(models))
    for n in sizes:
        devs = tuple(tuple(d.tolist()) for d in delta[:n])
        for v in cfg.variants:
            value = float(prefix[n - 1]) if v == "grouped_greedy" else macrofraction_bound(models[:n], v)
            out.append(TrialRecord(float(n), t, devs, value, v))
    return out


def _collect(fn, cfg: ExperimentConfig, indices: range, workers: int) -> list[list[TrialRecord]]:
    if workers <= 1:
        return [fn(cfg, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, [cfg] * len(indices), indices))


def run_sigma_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepTable:
    if cfg.kind != "sigma_sweep":
        raise ValueError("config kind is not sigma_sweep")
    per_point = _collect(_sigma_point, cfg, range(len(cfg.grid)), workers)
    rows, records = [], []
    for sigma, recs in zip(cfg.grid, per_point):
        mean, se = _summarise(np.array([r.bound for r in recs]))
        rows.append(SweepRow(sigma, mean, se, "deviation", cfg.trials))
        records.extend(recs)
    return SweepTable(cfg, rows, records)


def run_macrofraction_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepTable:
    if cfg.kind != "macrofraction_sweep":
        raise ValueError("config kind is not macrofraction_sweep")
    per_trial = _collect(_macro_trial, cfg, range(cfg.trials), workers)
    records = [r for recs in per_trial for r in recs]
    rows = []
    for v in cfg.variants:
        for n in cfg.grid:
            vals = np.array([r.bound for r in records if r.variant == v and r.grid_value == n])
            mean, se = _summarise(vals)
            rows.append(SweepRow(n, mean, se, v, cfg.trials))
    return SweepTable(cfg, rows, records)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> SweepTable:
    if cfg.kind == "sigma_sweep":
        return run_sigma_sweep(cfg, workers)
    return run_macrofraction_sweep(cfg, workers)


def format_csv(table: SweepTable) -> str:
    if not table.rows:
        raise ValueError("empty table")
    cfg = table.config
    lines = [CSV_HEADER]
    for r in table.rows:
        lines.append(f"{r.grid_value!r},{r.mean!r},{r.stderr!r},{r.variant},{r.trials},{cfg.beta!r},{cfg.seed}")
    return "\n".join(lines) + "\n"


def emit_csv(table: SweepTable, path) -> None:
    Path(path).write_text(format_csv(table))


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def format_svg(table: SweepTable, width: int = 640, height: int = 420) -> str:
    """Line plot, one polyline per variant; deterministic text output."""
    if not table.rows:
        raise ValueError("empty table")
    left, right, top, bottom = 70, 20, 20, 50
    xs = [r.grid_value for r in table.rows]
    ys = [r.mean for r in table.rows]
    x0, x1 = min(xs), max(xs)
    y0, y1 = 0.0, max(max(ys), 1e-12) * 1.05
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(x):
        return left + (x - x0) / (x1 - x0) * (width - left - right)

    def sy(y):
        return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom)

    xlabel = "sigma" if table.config.kind == "sigma_sweep" else "N_E"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{(left + width - right) / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="14">{xlabel}</text>',
        f'<text x="16" y="{(top + height - bottom) / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {(top + height - bottom) / 2:.1f})">mean bound</text>',
        f'<text x="{left}" y="{height - bottom + 18}" text-anchor="middle" font-size="11">{x0:g}</text>',
        f'<text x="{width - right}" y="{height - bottom + 18}" text-anchor="middle" font-size="11">{x1:g}</text>',
        f'<text x="{left - 6}" y="{height - bottom}" text-anchor="end" font-size="11">0</text>',
        f'<text x="{left - 6}" y="{top + 10}" text-anchor="end" font-size="11">{y1:.3g}</text>',
    ]
    variants = list(dict.fromkeys(r.variant for r in table.rows))
    for n, v in enumerate(variants):
        pts = " ".join(f"{sx(r.grid_value):.3f},{sy(r.mean):.3f}" for r in table.variant_rows(v))
        colour = _COLOURS[n % len(_COLOURS)]
        parts.append(f'<polyline data-variant="{v}" fill="none" stroke="{colour}" stroke-width="2" points="{pts}"/>')
        parts.append(f'<text x="{width - right - 4}" y="{top + 14 + 16 * n}" text-anchor="end" '
                     f'font-size="12" fill="{colour}">{v}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_svg_lineplot(table: SweepTable, path) -> None:
    Path(path).write_text(format_svg(table))


def linear_fit_r2(x, y) -> float:
    """Coefficient of determination of the least-squares line through (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
