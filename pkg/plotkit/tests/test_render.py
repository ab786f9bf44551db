"""Rendering tests on synthetic tables."""

import csv
import math

import pytest

from plotkit.dataio import DataError, read_table
from plotkit.figspec import FigureKind, FigureSpec
from plotkit.render import render

HEADER = ("theta", "theta_over_pi", "delta", "delta_over_pi", "p",
          "protocol", "qber", "qber_err", "c_param", "c_param_err",
          "rate_raw", "rate_clamped")


def write_table(path, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        writer.writerows(rows)
    return str(path)


def curve_row(theta, protocol, rate, qber=0.03, qber_err="", c="", c_err="",
              delta=0.0):
    return (theta, theta / math.pi, delta, delta / math.pi, 0.06, protocol,
            qber, qber_err, c, c_err, rate, max(rate, 0.0))


def theta_curve_table(tmp_path, with_errors=False):
    rows = []
    err = 0.001 if with_errors else ""
    for i in range(5):
        theta = 0.1 * i
        rows.append(curve_row(theta, "BB84_XY", 0.5 - theta, qber_err=err))
        rows.append(curve_row(theta, "RFI", 0.25, qber_err=err, c=1.7,
                              c_err=err if with_errors else ""))
    return write_table(tmp_path / "curve.csv", rows)


def grid_table(tmp_path, protocols=("BB84_XY", "RFI"), drop=None):
    rows = []
    for i in range(3):
        for j in range(4):
            theta, delta = 0.2 * i, 0.3 * j + 0.1
            for name in protocols:
                if drop and (i, j, name) == drop:
                    continue
                rows.append((theta, theta / math.pi, delta, delta / math.pi,
                             0.06, name, 0.03 + 0.01 * i, "",
                             1.5 if name == "RFI" else "", "",
                             0.4 - 0.1 * j, max(0.4 - 0.1 * j, 0.0)))
    return write_table(tmp_path / "grid.csv", rows)


class TestReadTable:
    def test_reads_rows(self, tmp_path):
        rows = read_table(theta_curve_table(tmp_path))
        assert len(rows) == 10
        assert rows[1].protocol == "RFI"
        assert rows[1].c_param == 1.7
        assert rows[0].c_param is None

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("theta,delta\n0,0\n")
        with pytest.raises(DataError, match="'theta_over_pi'"):
            read_table(str(path))

    def test_header_only_is_no_data_rows(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(",".join(HEADER) + "\n")
        with pytest.raises(DataError, match="no data rows"):
            read_table(str(path))

    def test_bad_number_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(HEADER) + "\n" +
                        "0,0,0,0,oops,RFI,0.03,,1.5,,0.2,0.2\n")
        with pytest.raises(DataError, match="bad.csv:2.*'p'"):
            read_table(str(path))


class TestRenderCurves:
    def spec(self, table, out, kind=FigureKind.CURVES_VS_THETA):
        return FigureSpec(input_csv=table, kind=kind, output_path=str(out))

    def test_writes_png_and_summary(self, tmp_path):
        table = theta_curve_table(tmp_path)
        out = tmp_path / "fig.png"
        summary = render(self.spec(table, out))
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        assert set(summary["series"]) == {"rate", "qber", "c_param"}
        assert set(summary["series"]["rate"]) == {"BB84_XY", "RFI"}
        assert summary["series"]["c_param"] == {
            "RFI": {"x": [0.1 * i / math.pi for i in range(5)],
                    "y": [1.7] * 5}}
        xs = summary["series"]["rate"]["BB84_XY"]["x"]
        assert xs == sorted(xs)

    def test_error_bars_accepted(self, tmp_path):
        table = theta_curve_table(tmp_path, with_errors=True)
        out = tmp_path / "fig.png"
        summary = render(self.spec(table, out))
        assert out.exists()
        assert summary["series"]["qber"]["RFI"]["y"] == [0.03] * 5

    def test_no_c_column_drops_panel(self, tmp_path):
        rows = [curve_row(0.1 * i, "BB84_XY", 0.4) for i in range(4)]
        table = write_table(tmp_path / "c.csv", rows)
        summary = render(self.spec(table, tmp_path / "f.png"))
        assert set(summary["series"]) == {"rate", "qber"}

    def test_repeat_render_is_byte_identical(self, tmp_path):
        table = theta_curve_table(tmp_path)
        first, second = tmp_path / "a.png", tmp_path / "b.png"
        render(self.spec(table, first))
        render(self.spec(table, second))
        assert first.read_bytes() == second.read_bytes()

    def test_mixed_fixed_angle_rejected(self, tmp_path):
        rows = [curve_row(0.1, "RFI", 0.2, c=1.5),
                curve_row(0.2, "RFI", 0.2, c=1.5, delta=0.4)]
        table = write_table(tmp_path / "c.csv", rows)
        with pytest.raises(DataError, match="single delta"):
            render(self.spec(table, tmp_path / "f.png"))

    def test_curves_vs_delta_swaps_axes(self, tmp_path):
        rows = []
        for j in range(4):
            delta = 0.2 * j + 0.1
            rows.append((0.0, 0.0, delta, delta / math.pi, 0.06, "SIX_STATE",
                         0.04, "", "", "", 0.3 - 0.1 * j,
                         max(0.3 - 0.1 * j, 0.0)))
        table = write_table(tmp_path / "d.csv", rows)
        summary = render(self.spec(table, tmp_path / "f.png",
                                   FigureKind.CURVES_VS_DELTA))
        xs = summary["series"]["rate"]["SIX_STATE"]["x"]
        assert xs == pytest.approx([(0.2 * j + 0.1) / math.pi
                                    for j in range(4)])

    def test_unknown_protocol_rejected(self, tmp_path):
        rows = [curve_row(0.1, "B92", 0.2), curve_row(0.2, "B92", 0.2)]
        table = write_table(tmp_path / "c.csv", rows)
        with pytest.raises(DataError, match="B92"):
            render(self.spec(table, tmp_path / "f.png"))

    def test_all_rates_empty_rejected(self, tmp_path):
        rows = [(0.1, 0.1 / math.pi, 0, 0, 0.06, "RFI", "", "", "", "", "", "")
                for _ in range(2)]
        table = write_table(tmp_path / "c.csv", rows)
        with pytest.raises(DataError, match="every rate cell is empty"):
            render(self.spec(table, tmp_path / "f.png"))


class TestRenderSurface:
    def spec(self, table, out, kind=FigureKind.SURFACE_RATE):
        return FigureSpec(input_csv=table, kind=kind, output_path=str(out))

    def test_full_grid_renders(self, tmp_path):
        table = grid_table(tmp_path)
        out = tmp_path / "surface.png"
        summary = render(self.spec(table, out))
        assert out.exists()
        assert set(summary["series"]) == {"BB84_XY", "RFI"}
        z = summary["series"]["RFI"]["z"]
        assert len(z) == 3 and len(z[0]) == 4

    def test_qber_variant_uses_qber_column(self, tmp_path):
        table = grid_table(tmp_path)
        summary = render(self.spec(table, tmp_path / "q.png",
                                   FigureKind.SURFACE_QBER))
        assert summary["series"]["BB84_XY"]["z"][2][0] == pytest.approx(0.05)

    def test_incomplete_grid_rejected(self, tmp_path):
        table = grid_table(tmp_path, drop=(1, 2, "RFI"))
        with pytest.raises(DataError, match="full.*grid"):
            render(self.spec(table, tmp_path / "f.png"))

    def test_degenerate_axis_rejected(self, tmp_path):
        rows = [curve_row(0.1 * i, "RFI", 0.2, c=1.5) for i in range(4)]
        table = write_table(tmp_path / "line.csv", rows)
        with pytest.raises(DataError, match="2D grid"):
            render(self.spec(table, tmp_path / "f.png"))
