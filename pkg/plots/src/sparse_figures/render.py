"""Draw sweep figures from the experiment toolkit's CSV files.

The renderer consumes the two fixed CSV schemas the toolkit emits — trial
rows and summary rows — and draws one of five figures. It never mutates its
inputs and adds no statistics of its own: medians and quartile bands come
straight from the summary columns, and the figures that work from trial
rows show them as raw points.
"""

from __future__ import annotations

import csv
from importlib import resources
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.figure import Figure

__all__ = [
    "FIGURES",
    "SUMMARY_COLUMNS",
    "TRIAL_COLUMNS",
    "SchemaError",
    "load_rows",
    "render_figure",
    "save_figure",
    "use_shared_style",
]

FIGURES = (
    "trajectories-log",
    "alg-comparison",
    "phase-transition",
    "dimension-bias",
    "sample-complexity",
)

# The toolkit's CSV contracts, restated here because files are the only
# interface between the two packages.
TRIAL_COLUMNS = (
    "family",
    "axis_value",
    "trial",
    "estimator",
    "selected_t_or_lambda",
    "l2_error_sq",
    "linf_on_support",
    "linf_off_support",
    "iterations_used",
    "stop_reason",
)
SUMMARY_COLUMNS = (
    "family",
    "axis_value",
    "estimator",
    "median_l2",
    "p25_l2",
    "p75_l2",
    "excluded_trials",
)

_SERIES_COLORS = {
    "gd": "C0",
    "lasso-oracle": "C1",
    "oracle-ls": "C2",
    "null": "C3",
    "gd-alg1": "C0",
    "gd-alg2": "C1",
}


class SchemaError(ValueError):
    """An input CSV does not match the expected column contract."""


def use_shared_style() -> None:
    """Activate the style file shipped with the package."""
    with resources.as_file(
        resources.files("sparse_figures").joinpath("figures.mplstyle")
    ) as path:
        plt.style.use(str(path))


def load_rows(path: str, expected: Sequence[str]) -> list[dict]:
    """Read a CSV and check its header against the expected schema.

    Returns one dict per data row. Raises SchemaError naming the first
    offending column when the header deviates.
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: file is empty, expected header {list(expected)}")
        _check_header(path, header, expected)
        return [dict(zip(expected, row)) for row in reader]


def _check_header(path: str, header: Sequence[str], expected: Sequence[str]) -> None:
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column {missing[0]!r}")
    extra = [c for c in header if c not in expected]
    if extra:
        raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
    for position, (got, want) in enumerate(zip(header, expected)):
        if got != want:
            raise SchemaError(
                f"{path}: column {want!r} expected at position {position}, found {got!r}"
            )


def _estimators(rows: list[dict]) -> list[str]:
    seen: list[str] = []
    for row in rows:
        if row["estimator"] not in seen:
            seen.append(row["estimator"])
    return seen


def _color(estimator: str) -> Optional[str]:
    return _SERIES_COLORS.get(estimator)


def _summary_series(rows: list[dict], estimator: str):
    """Axis-sorted (x, median, p25, p75) for one estimator's summary rows."""
    picked = sorted(
        (r for r in rows if r["estimator"] == estimator),
        key=lambda r: float(r["axis_value"]),
    )
    xs = [float(r["axis_value"]) for r in picked]
    med = [float(r["median_l2"]) for r in picked]
    lo = [float(r["p25_l2"]) for r in picked]
    hi = [float(r["p75_l2"]) for r in picked]
    return xs, med, lo, hi


def _draw_summary_curves(ax, rows: list[dict]) -> None:
    for estimator in _estimators(rows):
        xs, med, lo, hi = _summary_series(rows, estimator)
        color = _color(estimator)
        ax.plot(xs, med, marker="o", label=estimator, color=color)
        ax.fill_between(xs, lo, hi, alpha=0.2, color=color, linewidth=0)
    if rows:
        ax.legend()
    ax.set_ylabel("squared error")


def _fig_trajectories_log(summary: list[dict]) -> Figure:
    fig, ax = plt.subplots()
    _draw_summary_curves(ax, summary)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("initialization size")
    ax.set_title("Recovery error against initialization size")
    return fig


def _fig_alg_comparison(trials: list[dict]) -> Figure:
    fig, ax = plt.subplots()
    for estimator in _estimators(trials):
        picked = [r for r in trials if r["estimator"] == estimator]
        xs = [float(r["trial"]) for r in picked]
        ys = [float(r["iterations_used"]) for r in picked]
        ax.plot(xs, ys, linestyle="none", marker="o", label=estimator, color=_color(estimator))
    if trials:
        ax.set_yscale("log")
        ax.legend()
    ax.set_xlabel("trial")
    ax.set_ylabel("iterations to matched error")
    ax.set_title("Constant step against doubling schedule")
    return fig


def _fig_phase_transition(summary: list[dict], threshold: Optional[float]) -> Figure:
    fig, ax = plt.subplots()
    _draw_summary_curves(ax, summary)
    if threshold is not None:
        ax.axvline(threshold, color="red", linewidth=1.2, label="threshold")
    ax.set_xlabel("signal magnitude")
    ax.set_title("Phase transition at the noise floor")
    return fig


def _fig_dimension_bias(summary: list[dict]) -> Figure:
    fig, ax = plt.subplots()
    _draw_summary_curves(ax, summary)
    ax.set_xscale("log")
    ax.set_xlabel("ambient dimension")
    ax.set_title("Error growth with dimension")
    return fig


def _fig_sample_complexity(summary: list[dict], trials: Optional[list[dict]]) -> Figure:
    if trials is None:
        fig, ax = plt.subplots()
        axes = [ax]
    else:
        fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2))
    _draw_summary_curves(axes[0], summary)
    axes[0].set_xlabel("sample size")
    axes[0].set_title("Error against sample size")
    if trials is not None:
        ax = axes[1]
        picked = [r for r in trials if r["estimator"] == "gd"]
        xs = [float(r["axis_value"]) for r in picked]
        ys = [float(r["linf_off_support"]) for r in picked]
        ax.plot(xs, ys, linestyle="none", marker="o", color=_color("gd"))
        ax.set_yscale("log")
        ax.set_xlabel("sample size")
        ax.set_ylabel("off-support sup norm")
        ax.set_title("Off-support mass per trial")
    return fig


def render_figure(
    figure: str,
    trials: Optional[str] = None,
    summary: Optional[str] = None,
    overlay_threshold: Optional[float] = None,
) -> Figure:
    """Load the CSVs a figure needs and draw it, returning the Figure."""
    if figure not in FIGURES:
        raise SchemaError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    needs_summary = figure != "alg-comparison"
    needs_trials = figure == "alg-comparison"
    if needs_summary and summary is None:
        raise SchemaError(f"{figure} requires a summary CSV")
    if needs_trials and trials is None:
        raise SchemaError(f"{figure} requires a trial CSV")
    summary_rows = load_rows(summary, SUMMARY_COLUMNS) if summary is not None else None
    trial_rows = load_rows(trials, TRIAL_COLUMNS) if trials is not None else None

    use_shared_style()
    if figure == "trajectories-log":
        return _fig_trajectories_log(summary_rows)
    if figure == "alg-comparison":
        return _fig_alg_comparison(trial_rows)
    if figure == "phase-transition":
        return _fig_phase_transition(summary_rows, overlay_threshold)
    if figure == "dimension-bias":
        return _fig_dimension_bias(summary_rows)
    return _fig_sample_complexity(summary_rows, trial_rows)


def save_figure(fig: Figure, out_path: str, fixed_style: bool = False) -> None:
    """Write the figure; with fixed_style the byte stream is reproducible.

    Reproducibility needs two knobs beyond the style file: a pinned hash
    salt for generated SVG ids and no timestamp metadata.
    """
    kwargs = {}
    if fixed_style:
        matplotlib.rcParams["svg.hashsalt"] = "sparse-figures"
        if out_path.endswith(".svg"):
            kwargs["metadata"] = {"Date": None}
        elif out_path.endswith(".pdf"):
            kwargs["metadata"] = {"CreationDate": None}
    fig.savefig(out_path, **kwargs)
    plt.close(fig)
