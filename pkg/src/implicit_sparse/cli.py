"""Command-line front end: parse configs, dispatch families, emit CSV/JSON.

Configs are JSON files whose keys mirror ExperimentConfig; a preset (desk or
paper) supplies every field the file leaves out, so an empty file is a valid
config. Numeric CSV fields are written with 17 significant digits — enough
to round-trip a double — and rerunning a command with the same config and
seed reproduces its output files byte for byte.

Exit codes: 0 success, 2 config/validation error, 3 numeric divergence or a
failed lemma check, 4 capacity refusal, 5 I/O error (including refusing to
overwrite an existing output without --force).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from typing import Optional

import numpy as np

from .core import SeededRng
from .descent import estimate_wmax, recommended_settings
from .design import DesignKind, max_noise_stat
from .errors import ConfigError, ToolkitError
from .experiments import (
    FAMILIES,
    ExperimentConfig,
    TrialRecord,
    _draw_trial,
    preset_config,
    run_trial,
    specialize_axis,
    summarize_records,
    sweep_records,
)
from .scalar_dynamics import run_lemma_suite

__all__ = [
    "TRIAL_COLUMNS",
    "SUMMARY_COLUMNS",
    "LEMMA_COLUMNS",
    "config_to_json",
    "main",
    "parse_config",
]

SEED_ENV_VAR = "IMPLICIT_SPARSE_SEED"

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
LEMMA_COLUMNS = ("lemma", "cases", "failures", "worst_margin", "passed")

_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


def parse_config(path: str, preset: str = "desk") -> ExperimentConfig:
    """Load a JSON config, filling unset fields from the preset defaults."""
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown config key {unknown[0]!r}")
    family = data.pop("family", "phase-transition-gamma")
    cfg = preset_config(family, preset)
    overrides = {}
    for key, value in data.items():
        if key == "design":
            overrides[key] = _parse_design(value, path)
        elif key == "axis_values":
            if not isinstance(value, list):
                raise ConfigError(f"{path}: axis_values must be a list")
            overrides[key] = tuple(float(v) for v in value)
        elif key in ("n", "d", "k", "tau", "repetitions", "base_seed"):
            overrides[key] = int(value)
        elif key == "axis_name":
            overrides[key] = str(value)
        elif key == "eta":
            overrides[key] = None if value is None else float(value)
        else:
            overrides[key] = float(value)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _parse_design(value, path: str) -> DesignKind:
    if isinstance(value, str):
        return DesignKind(variant=value)
    if isinstance(value, dict):
        extra = sorted(set(value) - {"variant", "mu"})
        if extra:
            raise ConfigError(f"{path}: unknown design key {extra[0]!r}")
        return DesignKind(
            variant=value.get("variant", "rademacher"), mu=float(value.get("mu", 0.0))
        )
    raise ConfigError(f"{path}: design must be a string or an object")


def config_to_json(cfg: ExperimentConfig) -> str:
    """Serialize a config so that parsing the result reproduces it exactly."""
    payload = dataclasses.asdict(cfg)
    payload["design"] = {"variant": cfg.design.variant, "mu": cfg.design.mu}
    payload["axis_values"] = list(cfg.axis_values)
    return json.dumps(payload, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _open_for_write(path: str, force: bool):
    if os.path.exists(path) and not force:
        raise FileExistsError(f"{path} exists; pass --force to overwrite")
    return open(path, "w", encoding="utf-8", newline="")


def _write_csv(path: str, force: bool, header, rows) -> None:
    with _open_for_write(path, force) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _trial_row(family: str, axis_value: float, trial: int, record: TrialRecord):
    return (
        family,
        axis_value,
        trial,
        record.estimator,
        record.selected,
        record.l2_error_sq,
        record.linf_on_support,
        record.linf_off_support,
        record.iterations_used,
        record.stop_reason,
    )


def write_trial_csv(path: str, family: str, rows, force: bool = False) -> None:
    _write_csv(
        path,
        force,
        TRIAL_COLUMNS,
        (_trial_row(family, value, trial, record) for value, trial, record in rows),
    )


def write_summary_csv(path: str, family: str, summaries, force: bool = False) -> None:
    _write_csv(
        path,
        force,
        SUMMARY_COLUMNS,
        (
            (
                family,
                s.axis_value,
                s.estimator,
                s.median_l2,
                s.p25_l2,
                s.p75_l2,
                s.excluded_trials,
            )
            for s in summaries
        ),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = parse_config(args.config, args.preset)
    else:
        cfg = preset_config(args.family, args.preset)
    seed: Optional[int] = args.seed
    if seed is None and os.environ.get(SEED_ENV_VAR):
        try:
            seed = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    if seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=seed)
    return cfg


def _ensure_out_dir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _cmd_estimate(args) -> int:
    if (args.x_csv is None) != (args.y_csv is None):
        raise ConfigError("--x-csv and --y-csv must be given together")
    if args.x_csv is not None:
        x = np.loadtxt(args.x_csv, delimiter=",", ndmin=2)
        y = np.loadtxt(args.y_csv, delimiter=",")
        probe = estimate_wmax(x, y)
        signal = None
    else:
        cfg = _resolve_config(args)
        data = _draw_trial(specialize_axis(cfg, cfg.axis_values[0]), cfg.base_seed + args.trial)
        x, y, signal = data.x, data.y, data.signal
        probe = estimate_wmax(x, y)
    payload = {
        "estimate": probe.estimate,
        "f_max": probe.f_max,
        "degenerate": probe.degenerate,
        "production_eta": probe.production_eta,
    }
    if signal is not None and not probe.degenerate:
        residual_noise = y - x @ signal.w_star
        maxnoise = max_noise_stat(x, residual_noise)
        eps = max(maxnoise, 1e-8)
        settings = recommended_settings(
            probe.estimate, signal.w_min, eps, x.shape[1], signal.k, maxnoise
        )
        payload["budgets"] = {
            "kappa_eff": settings.kappa_eff,
            "delta": settings.delta_budget,
            "alpha": settings.alpha_budget,
            "eta": settings.eta_budget,
            "iterations_constant_step": settings.t_budget_alg1,
            "iterations_doubling": settings.t_budget_alg2,
        }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_run(args) -> int:
    cfg = _resolve_config(args)
    out = _ensure_out_dir(args)
    rows = []
    for value in cfg.axis_values:
        for record in run_trial(specialize_axis(cfg, value), args.trial):
            rows.append((float(value), args.trial, record))
    path = os.path.join(out, f"trial-{cfg.family}-{args.trial}.csv")
    write_trial_csv(path, cfg.family, rows, force=args.force)
    print(path)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    out = _ensure_out_dir(args)
    rows = sweep_records(cfg)
    summaries = summarize_records(rows)
    trial_path = os.path.join(out, f"trials-{cfg.family}.csv")
    summary_path = os.path.join(out, f"summary-{cfg.family}.csv")
    write_trial_csv(trial_path, cfg.family, rows, force=args.force)
    write_summary_csv(summary_path, cfg.family, summaries, force=args.force)
    print(trial_path)
    print(summary_path)
    return 0


def _cmd_lemmas(args) -> int:
    seed = args.seed
    if seed is None and os.environ.get(SEED_ENV_VAR):
        seed = int(os.environ[SEED_ENV_VAR])
    if seed is None:
        seed = 0
    results = run_lemma_suite(SeededRng(seed), cases=args.cases)
    out = _ensure_out_dir(args)
    path = os.path.join(out, "lemmas.csv")
    _write_csv(
        path,
        args.force,
        LEMMA_COLUMNS,
        ((r.name, r.cases, r.failures, r.worst_margin, r.passed) for r in results),
    )
    print(path)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 3
    return 0


def _cmd_report(args) -> int:
    out = _ensure_out_dir(args)
    names = sorted(
        name
        for name in os.listdir(out)
        if name.startswith("summary-") and name.endswith(".csv") and name != "summary-index.csv"
    )
    if not names:
        raise FileNotFoundError(f"no summary-*.csv files in {out}")
    collected = []
    for name in names:
        with open(os.path.join(out, name), "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != list(SUMMARY_COLUMNS):
                raise ConfigError(f"{name}: unexpected summary header {header}")
            collected.extend(reader)
    path = os.path.join(out, "report.csv")
    with _open_for_write(path, args.force) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        writer.writerows(collected)
    print(path)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="implicit-sparse",
        description="Sparse regression via implicitly regularized gradient descent.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--config", help="JSON config file; omitted fields come from the preset")
        p.add_argument(
            "--family",
            choices=FAMILIES,
            default="phase-transition-gamma",
            help="experiment family when no config file is given",
        )
        p.add_argument("--preset", choices=("desk", "paper"), default="desk")
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help=f"base seed; beats the {SEED_ENV_VAR} environment variable",
        )
        if with_out:
            p.add_argument("--out", default=".", help="output directory (created if absent)")
            p.add_argument(
                "--force", action="store_true", help="overwrite existing output files"
            )

    p_estimate = sub.add_parser("estimate", help="probe-step scale estimate and parameter budgets")
    add_common(p_estimate, with_out=False)
    p_estimate.add_argument("--trial", type=int, default=0, help="trial index to draw")
    p_estimate.add_argument("--x-csv", help="design matrix CSV (rows = samples)")
    p_estimate.add_argument("--y-csv", help="response vector CSV")
    p_estimate.set_defaults(handler=_cmd_estimate)

    p_run = sub.add_parser("run", help="run one trial across the sweep axis, write trial CSV")
    add_common(p_run)
    p_run.add_argument("--trial", type=int, default=0, help="trial index to run")
    p_run.set_defaults(handler=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the full sweep, write trial and summary CSVs")
    add_common(p_sweep)
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_lemmas = sub.add_parser("lemmas", help="run the scalar-sequence guarantee suite")
    p_lemmas.add_argument("--cases", type=int, default=200, help="random cases per check")
    p_lemmas.add_argument("--seed", type=int, default=None)
    p_lemmas.add_argument("--out", default=".")
    p_lemmas.add_argument("--force", action="store_true")
    p_lemmas.set_defaults(handler=_cmd_lemmas)

    p_report = sub.add_parser("report", help="collate summary CSVs in --out into report.csv")
    p_report.add_argument("--out", default=".")
    p_report.add_argument("--force", action="store_true")
    p_report.set_defaults(handler=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
