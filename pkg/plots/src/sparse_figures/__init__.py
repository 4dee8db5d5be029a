"""Figure renderer for the sparse-regression toolkit's sweep CSVs."""

from .render import (
    FIGURES,
    SUMMARY_COLUMNS,
    TRIAL_COLUMNS,
    SchemaError,
    load_rows,
    render_figure,
    save_figure,
)

__all__ = [
    "FIGURES",
    "SUMMARY_COLUMNS",
    "TRIAL_COLUMNS",
    "SchemaError",
    "load_rows",
    "render_figure",
    "save_figure",
]
