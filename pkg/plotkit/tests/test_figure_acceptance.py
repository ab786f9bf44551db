"""Acceptance: figures render from real sweep output end to end.

Input tables are produced by the sweep CLI as a subprocess, so only the
published CSV contract couples the two packages.
"""

import subprocess
import sys

import pytest

from plotkit.figspec import FigureKind, FigureSpec
from plotkit.render import render

SURFACE_CONFIG = """
[sweep]
mode = analytic
variable = grid2d
theta_start = 0
theta_stop = 0.5pi
theta_steps = 64
delta_start = 0.015625pi
delta_stop = pi
delta_steps = 64

[channel]
p = 0.06

[output]
csv = surface.csv
"""

FLAT_CURVE_CONFIG = """
[sweep]
mode = analytic
variable = rotation
start = 0
stop = 0.5pi
steps = 64

[channel]
p = 0.06
delta = 0

[output]
csv = rotation.csv
"""

MC_CURVE_CONFIG = """
[sweep]
mode = montecarlo
variable = {variable}
start = {start}
stop = {stop}
steps = 8

[channel]
p = 0.06
{fixed} = 0

[montecarlo]
pulses = 100000
seed = 1729

[output]
csv = {csv}
"""


def run_sweep_cli(workdir, subcommand, text, name):
    config = workdir / name
    config.write_text(text)
    proc = subprocess.run([sys.executable, "-m", "rfiqkd", subcommand,
                           config.name], capture_output=True, text=True,
                          cwd=str(workdir))
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("figures")
    run_sweep_cli(path, "sweep", SURFACE_CONFIG, "surface.ini")
    run_sweep_cli(path, "sweep", FLAT_CURVE_CONFIG, "rotation.ini")
    run_sweep_cli(path, "mc", MC_CURVE_CONFIG.format(
        variable="rotation", start="0", stop="0.45pi", fixed="delta",
        csv="mc_rotation.csv"), "mc_rotation.ini")
    run_sweep_cli(path, "mc", MC_CURVE_CONFIG.format(
        variable="fluctuation", start="0.05pi", stop="pi", fixed="theta",
        csv="mc_fluctuation.csv"), "mc_fluctuation.ini")
    return path


def test_criterion_11_surfaces_render(workdir):
    for kind, name in ((FigureKind.SURFACE_RATE, "surface_rate.png"),
                       (FigureKind.SURFACE_QBER, "surface_qber.png")):
        summary = render(FigureSpec(input_csv=str(workdir / "surface.csv"),
                                    kind=kind,
                                    output_path=str(workdir / name)))
        assert (workdir / name).stat().st_size > 0
        assert set(summary["series"]) == {"BB84_XY", "BB84_XZ",
                                          "SIX_STATE", "RFI"}
        print(f"criterion 11 [{kind.value}]: PASS")


def test_criterion_11_mc_curves_render(workdir):
    for kind, csv_name, out in (
            (FigureKind.CURVES_VS_THETA, "mc_rotation.csv", "mc_theta.png"),
            (FigureKind.CURVES_VS_DELTA, "mc_fluctuation.csv", "mc_delta.png")):
        summary = render(FigureSpec(input_csv=str(workdir / csv_name),
                                    kind=kind,
                                    output_path=str(workdir / out)))
        assert (workdir / out).stat().st_size > 0
        assert set(summary["series"]) == {"rate", "qber", "c_param"}
        assert len(summary["series"]["rate"]["RFI"]["x"]) == 8
        print(f"criterion 11 [{kind.value} mc]: PASS")


def test_criterion_11_rotation_curve_is_flat_for_rfi(workdir):
    summary = render(FigureSpec(input_csv=str(workdir / "rotation.csv"),
                                kind=FigureKind.CURVES_VS_THETA,
                                output_path=str(workdir / "rotation.png")))
    rates = summary["series"]["rate"]["RFI"]["y"]
    assert len(rates) == 64
    assert max(rates) - min(rates) < 1e-9
    print("criterion 11 [RFI flatness]: PASS")
