import csv
import os

import pytest

from authfigures.cli import main
from authfigures.plotting import FigureSpec, SchemaError, build_figure, plot_rate_curve, read_curve_rows

DATA = os.path.join(os.path.dirname(__file__), "data")

MISS_CSVS = (os.path.join(DATA, "miss_m16.csv"), os.path.join(DATA, "miss_m128.csv"))
FA_CSV = os.path.join(DATA, "fa_noise_m16.csv")
INTRUDER_CSV = os.path.join(DATA, "intruder_m16.csv")


def _csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_read_rows_types_and_counts():
    rows = read_curve_rows(FA_CSV)
    assert len(rows) == 8
    assert rows[0]["snr_db"] == -10.0
    assert rows[0]["trials"] == 100000


def test_missing_column_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("scenario,snr_db\nmiss,0.0\n")
    with pytest.raises(SchemaError):
        read_curve_rows(str(bad))


def test_empty_body_rejected(tmp_path):
    bad = tmp_path / "empty.csv"
    bad.write_text(",".join(read_curve_rows.__globals__["REQUIRED_COLUMNS"]) + "\n")
    with pytest.raises(SchemaError):
        read_curve_rows(str(bad))


def test_scenario_mismatch_rejected(tmp_path):
    spec = FigureSpec(csv_paths=(FA_CSV,), output_base=str(tmp_path / "x"), scenario="miss")
    with pytest.raises(SchemaError):
        plot_rate_curve(spec)


def test_duplicate_grid_point_rejected(tmp_path):
    rows = open(FA_CSV).read().strip().split("\n")
    dup = tmp_path / "dup.csv"
    dup.write_text("\n".join(rows + [rows[1]]) + "\n")
    spec = FigureSpec(csv_paths=(str(dup),), output_base=str(tmp_path / "x"), scenario="fa_noise")
    with pytest.raises(SchemaError):
        plot_rate_curve(spec)


def test_two_curve_miss_figure_has_two_labeled_curves(tmp_path):
    spec = FigureSpec(csv_paths=MISS_CSVS, output_base=str(tmp_path / "miss"), scenario="miss")
    series = plot_rate_curve(spec)
    assert set(series) == {"M=16, target=0.001", "M=128, target=0.01"}
    assert os.path.exists(str(tmp_path / "miss.png"))
    assert os.path.exists(str(tmp_path / "miss.svg"))


@pytest.mark.parametrize(
    "scenario,paths",
    [("miss", MISS_CSVS), ("fa_noise", (FA_CSV,)), ("intruder", (INTRUDER_CSV,))],
)
def test_plotted_points_equal_csv_values_exactly(tmp_path, scenario, paths):
    # the acceptance check: every drawn point is a CSV value, unmodified
    spec = FigureSpec(csv_paths=paths, output_base=str(tmp_path / "m"), scenario=scenario)
    fig, _ = build_figure(spec)
    drawn = {}
    for line in fig.axes[0].lines:
        for x, y in zip(line.get_xdata(), line.get_ydata()):
            drawn.setdefault(float(x), set()).add(float(y))
    import matplotlib.pyplot as plt

    plt.close(fig)
    for path in paths:
        for row in _csv_rows(path):
            snr = float(row["snr_db"])
            rate = float(row["rate"])
            expected = rate if rate > 0.0 else float(row["ci_high"])
            assert snr in drawn
            assert expected in drawn[snr], (snr, expected, drawn[snr])


def test_zero_event_points_at_ci_upper_with_distinct_marker(tmp_path):
    spec = FigureSpec(csv_paths=(FA_CSV,), output_base=str(tmp_path / "fa"), scenario="fa_noise")
    fig, _ = build_figure(spec)
    markers = {line.get_marker(): line for line in fig.axes[0].lines}
    import matplotlib.pyplot as plt

    assert "v" in markers  # zero-rate marker present and distinct
    zero_line = markers["v"]
    assert list(zero_line.get_xdata()) == [18.0]
    assert list(zero_line.get_ydata()) == [3.9e-05]
    plt.close(fig)


def test_rerender_identical_svg_bytes(tmp_path):
    spec_a = FigureSpec(csv_paths=(INTRUDER_CSV,), output_base=str(tmp_path / "a"), scenario="intruder")
    spec_b = FigureSpec(csv_paths=(INTRUDER_CSV,), output_base=str(tmp_path / "b"), scenario="intruder")
    plot_rate_curve(spec_a)
    plot_rate_curve(spec_b)
    svg_a = open(str(tmp_path / "a.svg"), "rb").read()
    svg_b = open(str(tmp_path / "b.svg"), "rb").read()
    assert svg_a == svg_b
    png_a = open(str(tmp_path / "a.png"), "rb").read()
    png_b = open(str(tmp_path / "b.png"), "rb").read()
    assert png_a == png_b


def test_log_axis_and_no_smoothing(tmp_path):
    spec = FigureSpec(csv_paths=(FA_CSV,), output_base=str(tmp_path / "fa"), scenario="fa_noise")
    fig, series = build_figure(spec)
    assert fig.axes[0].get_yscale() == "log"
    [s] = series.values()
    rows = _csv_rows(FA_CSV)
    assert s.snr_db == [float(r["snr_db"]) for r in rows]
    assert s.rate == [float(r["rate"]) for r in rows]
    import matplotlib.pyplot as plt

    plt.close(fig)


def test_cli_all_three_scenarios(tmp_path, capsys):
    jobs = (
        ("miss", MISS_CSVS, "miss"),
        ("fa_noise", (FA_CSV,), "fa"),
        ("intruder", (INTRUDER_CSV,), "intruder"),
    )
    for scenario, paths, base in jobs:
        out = str(tmp_path / base)
        code = main(["--scenario", scenario, "--csv", *paths, "--out", out])
        assert code == 0
        assert os.path.exists(out + ".png")
        assert os.path.exists(out + ".svg")
    assert "wrote" in capsys.readouterr().out


def test_cli_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n1\n")
    code = main(["--scenario", "miss", "--csv", str(bad), "--out", str(tmp_path / "x")])
    assert code == 1
    assert "error" in capsys.readouterr().err
