"""Rate-curve figures from simulation CSVs.

Input is the simulator's CSV schema (one row per grid point):

    scenario,snr_db,m_active,n_seraph,pfa_target,trials,events,rate,
    ci_low,ci_high,master_seed

One curve is drawn per (m_active, pfa_target) pair, points exactly as logged
(no smoothing), on a log-scale rate axis with the Wilson band shaded.
Zero-event points cannot appear on a log axis at their value, so they are
drawn at the interval's upper bound with an open downward marker.

Rendering is deterministic: fixed style, fixed SVG hash salt, no embedded
timestamps; identical CSVs yield byte-identical SVGs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = (
    "scenario",
    "snr_db",
    "m_active",
    "n_seraph",
    "pfa_target",
    "trials",
    "events",
    "rate",
    "ci_low",
    "ci_high",
    "master_seed",
)

_TITLES = {
    "miss": "Missed detection rate",
    "fa_noise": "False authentication rate, noise only",
    "intruder": "False authentication rate, random-signature intruder",
}

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


class SchemaError(ValueError):
    """CSV does not conform to the simulator's schema."""


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple
    output_base: str  # writes <base>.png and <base>.svg
    scenario: str
    snr_limits: tuple | None = None
    rate_limits: tuple | None = None
    title: str | None = None

    def __post_init__(self):
        if not self.csv_paths:
            raise SchemaError("at least one CSV path is required")
        if self.scenario not in _TITLES:
            raise SchemaError(f"unknown scenario {self.scenario!r}")
        object.__setattr__(self, "csv_paths", tuple(self.csv_paths))


@dataclass
class CurveSeries:
    label: str
    snr_db: list = field(default_factory=list)
    rate: list = field(default_factory=list)
    ci_low: list = field(default_factory=list)
    ci_high: list = field(default_factory=list)


def read_curve_rows(path: str) -> list[dict]:
    """Parse and type one CSV; reject missing columns or malformed rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            try:
                rows.append(
                    {
                        "scenario": raw["scenario"],
                        "snr_db": float(raw["snr_db"]),
                        "m_active": int(raw["m_active"]),
                        "n_seraph": int(raw["n_seraph"]),
                        "pfa_target": float(raw["pfa_target"]),
                        "trials": int(raw["trials"]),
                        "events": int(raw["events"]),
                        "rate": float(raw["rate"]),
                        "ci_low": float(raw["ci_low"]),
                        "ci_high": float(raw["ci_high"]),
                        "master_seed": int(raw["master_seed"]),
                    }
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: malformed row ({exc})") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def collect_series(spec: FigureSpec) -> dict:
    """Group rows into one series per (m_active, pfa_target), sorted by SNR."""
    series: dict = {}
    for path in spec.csv_paths:
        for row in read_curve_rows(path):
            if row["scenario"] != spec.scenario:
                raise SchemaError(
                    f"{path}: scenario {row['scenario']!r} does not match figure scenario {spec.scenario!r}"
                )
            key = (row["m_active"], row["pfa_target"])
            if key not in series:
                series[key] = CurveSeries(label=f"M={key[0]}, target={key[1]:g}")
            s = series[key]
            if row["snr_db"] in s.snr_db:
                raise SchemaError(f"{path}: duplicate grid point {row['snr_db']} for {s.label}")
            s.snr_db.append(row["snr_db"])
            s.rate.append(row["rate"])
            s.ci_low.append(row["ci_low"])
            s.ci_high.append(row["ci_high"])
    for s in series.values():
        order = sorted(range(len(s.snr_db)), key=lambda i: s.snr_db[i])
        for name in ("snr_db", "rate", "ci_low", "ci_high"):
            setattr(s, name, [getattr(s, name)[i] for i in order])
    return dict(sorted(series.items()))


def _floor_for_log(series: dict) -> float:
    positive = [
        v
        for s in series.values()
        for v in (*s.rate, *s.ci_low, *s.ci_high)
        if v > 0.0
    ]
    if not positive:
        return 1e-6
    return 10.0 ** math.floor(math.log10(min(positive)) - 0.5)


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure; returns (fig, series) without saving."""
    series = collect_series(spec)
    floor = _floor_for_log(series)

    plt.rcParams["svg.hashsalt"] = "arrayauth-figures"
    fig, ax = plt.subplots(figsize=(6.4, 4.4), dpi=120)
    for idx, (key, s) in enumerate(series.items()):
        color = _COLORS[idx % len(_COLORS)]
        ax.fill_between(
            s.snr_db,
            [max(v, floor) for v in s.ci_low],
            [max(v, floor) for v in s.ci_high],
            color=color,
            alpha=0.18,
            linewidth=0,
        )
        shown = [(x, r) for x, r in zip(s.snr_db, s.rate) if r > 0.0]
        if shown:
            ax.plot(
                [x for x, _ in shown],
                [r for _, r in shown],
                marker="o",
                markersize=4,
                linewidth=1.4,
                color=color,
                label=s.label,
            )
        zero = [(x, hi) for x, r, hi in zip(s.snr_db, s.rate, s.ci_high) if r == 0.0]
        if zero:
            ax.plot(
                [x for x, _ in zero],
                [max(hi, floor) for _, hi in zero],
                linestyle="none",
                marker="v",
                markersize=5,
                markerfacecolor="none",
                color=color,
                label=None if shown else s.label,
            )
    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("rate")
    ax.set_title(spec.title or _TITLES[spec.scenario])
    if spec.snr_limits:
        ax.set_xlim(spec.snr_limits)
    if spec.rate_limits:
        ax.set_ylim(spec.rate_limits)
    ax.grid(True, which="both", linestyle=":", linewidth=0.5)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig, {s.label: s for s in series.values()}


def plot_rate_curve(spec: FigureSpec) -> dict:
    """Render the figure to <output_base>.png and .svg.

    Returns the plotted series (label -> CurveSeries) so callers and tests can
    verify the drawn points equal the CSV values exactly.
    """
    fig, series = build_figure(spec)
    try:
        fig.savefig(spec.output_base + ".png", metadata={"Software": "arrayauth-figures"})
        fig.savefig(
            spec.output_base + ".svg",
            metadata={"Date": None, "Creator": "arrayauth-figures"},
        )
    finally:
        plt.close(fig)
    return series
