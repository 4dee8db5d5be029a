"""Renderer tests against hand-built CSV fixtures."""

import pytest

from sparse_figures import SUMMARY_COLUMNS, TRIAL_COLUMNS, SchemaError, load_rows, render_figure
from sparse_figures.cli import main

SUMMARY_HEADER = ",".join(SUMMARY_COLUMNS)
TRIAL_HEADER = ",".join(TRIAL_COLUMNS)

SUMMARY_BODY = "\n".join(
    [
        SUMMARY_HEADER,
        "phase-transition-gamma,0.25,gd,0.2,0.15,0.26,0",
        "phase-transition-gamma,1.0,gd,0.04,0.03,0.05,0",
        "phase-transition-gamma,0.25,oracle-ls,0.03,0.02,0.04,0",
        "phase-transition-gamma,1.0,oracle-ls,0.03,0.025,0.041,0",
        "",
    ]
)

TRIAL_BODY = "\n".join(
    [
        TRIAL_HEADER,
        "alg-comparison,64,0,gd-alg1,6000,0.01,0.05,0.001,6000,matched-floor",
        "alg-comparison,64,0,gd-alg2,410,0.01,0.05,0.001,410,matched-floor",
        "alg-comparison,64,1,gd-alg1,6000,0.011,0.051,0.001,6000,matched-floor",
        "alg-comparison,64,1,gd-alg2,392,0.012,0.052,0.001,392,matched-floor",
        "",
    ]
)


@pytest.fixture
def summary_csv(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text(SUMMARY_BODY)
    return str(path)


@pytest.fixture
def trial_csv(tmp_path):
    path = tmp_path / "trials.csv"
    path.write_text(TRIAL_BODY)
    return str(path)


@pytest.fixture
def sc_trial_csv(tmp_path):
    rows = [
        TRIAL_HEADER,
        "sample-complexity,305,0,gd,420,0.01,0.05,6.3e-07,2000,validation",
        "sample-complexity,609,0,gd,500,0.008,0.04,1.7e-12,2000,validation",
        "",
    ]
    path = tmp_path / "sc-trials.csv"
    path.write_text("\n".join(rows))
    return str(path)


# ---------------------------------------------------------------------------
# schema checking
# ---------------------------------------------------------------------------


def test_load_rows_parses_data(summary_csv):
    rows = load_rows(summary_csv, SUMMARY_COLUMNS)
    assert len(rows) == 4
    assert rows[0]["estimator"] == "gd"
    assert rows[1]["median_l2"] == "0.04"


def test_missing_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("family,axis_value,estimator,median_l2,p25_l2,p75_l2\n")
    with pytest.raises(SchemaError, match="excluded_trials"):
        load_rows(str(path), SUMMARY_COLUMNS)


def test_unexpected_column_named(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(SUMMARY_HEADER + ",surprise\n")
    with pytest.raises(SchemaError, match="surprise"):
        load_rows(str(path), SUMMARY_COLUMNS)


def test_reordered_column_named(tmp_path):
    cols = list(SUMMARY_COLUMNS)
    cols[0], cols[1] = cols[1], cols[0]
    path = tmp_path / "bad.csv"
    path.write_text(",".join(cols) + "\n")
    with pytest.raises(SchemaError, match="family"):
        load_rows(str(path), SUMMARY_COLUMNS)


def test_completely_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaError, match="header"):
        load_rows(str(path), SUMMARY_COLUMNS)


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def test_unknown_figure_rejected(summary_csv):
    with pytest.raises(SchemaError, match="unknown figure"):
        render_figure("histogram", summary=summary_csv)


def test_figures_require_their_inputs(summary_csv, trial_csv):
    with pytest.raises(SchemaError, match="summary"):
        render_figure("phase-transition", trials=trial_csv)
    with pytest.raises(SchemaError, match="trial"):
        render_figure("alg-comparison", summary=summary_csv)


def test_phase_transition_draws_threshold_line(summary_csv):
    fig = render_figure("phase-transition", summary=summary_csv, overlay_threshold=0.398)
    ax = fig.axes[0]
    vlines = [ln for ln in ax.get_lines() if list(ln.get_xdata()) == [0.398, 0.398]]
    assert len(vlines) == 1
    assert vlines[0].get_color() == "red"


def test_phase_transition_line_only_when_requested(summary_csv):
    fig = render_figure("phase-transition", summary=summary_csv)
    assert all(len(set(ln.get_xdata())) > 1 for ln in fig.axes[0].get_lines())


def test_trajectories_use_log_value_axis(summary_csv):
    fig = render_figure("trajectories-log", summary=summary_csv)
    assert fig.axes[0].get_yscale() == "log"


def test_sample_complexity_adds_off_support_panel(summary_csv, sc_trial_csv):
    lone = render_figure("sample-complexity", summary=summary_csv)
    assert len(lone.axes) == 1
    both = render_figure("sample-complexity", summary=summary_csv, trials=sc_trial_csv)
    assert len(both.axes) == 2
    assert both.axes[1].get_yscale() == "log"
    assert len(both.axes[1].get_lines()[0].get_xdata()) == 2


def test_renderer_leaves_inputs_untouched(summary_csv):
    before = open(summary_csv, "rb").read()
    render_figure("dimension-bias", summary=summary_csv)
    assert open(summary_csv, "rb").read() == before


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------


def test_cli_renders_svg(summary_csv, tmp_path, capsys):
    out = tmp_path / "fig.svg"
    assert main(["phase-transition", "--summary", summary_csv, "--out", str(out),
                 "--overlay-threshold", "0.398"]) == 0
    assert out.stat().st_size > 0
    assert str(out) in capsys.readouterr().out


def test_cli_empty_trial_csv_renders_empty_axes(tmp_path):
    path = tmp_path / "empty-trials.csv"
    path.write_text(TRIAL_HEADER + "\n")
    out = tmp_path / "fig.svg"
    assert main(["alg-comparison", "--trials", str(path), "--out", str(out)]) == 0
    assert out.stat().st_size > 0


def test_cli_fixed_style_is_byte_identical(trial_csv, tmp_path):
    out1, out2 = tmp_path / "a.svg", tmp_path / "b.svg"
    for out in (out1, out2):
        assert main(["alg-comparison", "--trials", trial_csv, "--out", str(out),
                     "--fixed-style"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_schema_error_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n")
    out = tmp_path / "fig.svg"
    assert main(["dimension-bias", "--summary", str(path), "--out", str(out)]) == 2
    assert "column" in capsys.readouterr().err


def test_cli_missing_input_exits_five(tmp_path, capsys):
    out = tmp_path / "fig.svg"
    assert main(["dimension-bias", "--summary", str(tmp_path / "nope.csv"),
                 "--out", str(out)]) == 5
    assert "nope.csv" in capsys.readouterr().err
