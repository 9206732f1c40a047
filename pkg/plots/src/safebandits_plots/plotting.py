"""Figure kinds and their CSV schemas.

regret       summary CSVs (t, algo, mean_cum_regret, stderr,
             violation_frac_by_t, detections_by_t): one regret curve per
             algorithm with a shaded stderr band.
means        env_means CSV (t, mean_0..mean_K): the piecewise-constant
             mean of every arm over rounds.
alpha-sweep  alpha_sweep CSV (alpha, algo, final_mean_regret, stderr):
             final regret versus the risk parameter, error bars per point.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

KINDS = ("means", "regret", "alpha-sweep")

SCHEMAS = {
    "regret": ["t", "algo", "mean_cum_regret", "stderr", "violation_frac_by_t", "detections_by_t"],
    "alpha-sweep": ["alpha", "algo", "final_mean_regret", "stderr"],
}


class SchemaError(ValueError):
    """Raised when an input CSV does not match the documented schema."""


@dataclass
class PlotJob:
    kind: str
    inputs: list[str]
    output: str
    changepoints: list[int] = field(default_factory=list)
    title: str = ""
    dump: str | None = None


def _read_rows(path: str, kind: str) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if kind == "means":
            expected_head = ["t"]
            if header[:1] != expected_head or not all(
                c.startswith("mean_") for c in header[1:]
            ) or len(header) < 2:
                raise SchemaError(
                    f"{path}: columns {header} do not match ['t', 'mean_0', ...]"
                )
        else:
            expected = SCHEMAS[kind]
            if header != expected:
                missing = [c for c in expected if c not in header]
                extra = [c for c in header if c not in expected]
                raise SchemaError(
                    f"{path}: columns {header} != expected {expected}"
                    f" (missing {missing}, unexpected {extra})"
                )
        rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _series_regret(paths: list[str]):
    series = {}
    for path in paths:
        for row in _read_rows(path, "regret"):
            entry = series.setdefault(row["algo"], ([], [], []))
            entry[0].append(int(row["t"]))
            entry[1].append(float(row["mean_cum_regret"]))
            entry[2].append(float(row["stderr"]))
    return series


def _series_means(paths: list[str]):
    rows = []
    for path in paths:
        rows.extend(_read_rows(path, "means"))
    arms = [c for c in rows[0].keys() if c.startswith("mean_")]
    t = [int(row["t"]) for row in rows]
    return {arm: (t, [float(row[arm]) for row in rows]) for arm in arms}


def _series_sweep(paths: list[str]):
    series = {}
    for path in paths:
        for row in _read_rows(path, "alpha-sweep"):
            entry = series.setdefault(row["algo"], ([], [], []))
            entry[0].append(float(row["alpha"]))
            entry[1].append(float(row["final_mean_regret"]))
            entry[2].append(float(row["stderr"]))
    return series


def _dump_series(path: str, kind: str, series) -> None:
    """Write the plotted numbers back out, one row per plotted point."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if kind == "regret":
            writer.writerow(["algo", "t", "mean_cum_regret", "stderr"])
            for algo in sorted(series):
                t, y, err = series[algo]
                for row in zip(t, y, err):
                    writer.writerow([algo, row[0], repr(row[1]), repr(row[2])])
        elif kind == "means":
            writer.writerow(["arm", "t", "mean"])
            for arm in sorted(series):
                t, y = series[arm]
                for row in zip(t, y):
                    writer.writerow([arm, row[0], repr(row[1])])
        else:
            writer.writerow(["algo", "alpha", "final_mean_regret", "stderr"])
            for algo in sorted(series):
                a, y, err = series[algo]
                for row in zip(a, y, err):
                    writer.writerow([algo, repr(row[0]), repr(row[1]), repr(row[2])])


def render(job: PlotJob) -> str:
    """Draw the requested figure; returns the output path."""
    if job.kind not in KINDS:
        raise SchemaError(f"unknown figure kind {job.kind!r}; choose from {KINDS}")
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if job.kind == "regret":
        series = _series_regret(job.inputs)
        for algo in sorted(series):
            t, y, err = series[algo]
            ax.plot(t, y, label=algo, linewidth=1.6)
            if any(e > 0 for e in err):
                lo = [v - e for v, e in zip(y, err)]
                hi = [v + e for v, e in zip(y, err)]
                ax.fill_between(t, lo, hi, alpha=0.2)
        ax.set_xlabel("round")
        ax.set_ylabel("mean cumulative regret")
    elif job.kind == "means":
        series = _series_means(job.inputs)
        for arm in sorted(series, key=lambda name: int(name.split("_")[1])):
            t, y = series[arm]
            label = "baseline" if arm == "mean_0" else f"arm {arm.split('_')[1]}"
            ax.plot(t, y, label=label, linewidth=1.6)
        ax.set_xlabel("round")
        ax.set_ylabel("arm mean")
        ax.set_ylim(-0.02, 1.02)
    else:
        series = _series_sweep(job.inputs)
        for algo in sorted(series):
            a, y, err = series[algo]
            order = sorted(range(len(a)), key=lambda i: a[i])
            ax.errorbar(
                [a[i] for i in order],
                [y[i] for i in order],
                yerr=[err[i] for i in order],
                marker="o",
                capsize=3,
                label=algo,
            )
        ax.set_xlabel("risk parameter alpha")
        ax.set_ylabel("final mean cumulative regret")
    for t_c in job.changepoints:
        ax.axvline(t_c, color="gray", linestyle="--", linewidth=0.9)
    if job.title:
        ax.set_title(job.title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(job.output, dpi=150)
    plt.close(fig)
    if job.dump:
        _dump_series(job.dump, job.kind, series)
    return job.output
