"""Figure construction from sweep tables."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Patch

from .dataio import DataError, TableRow, read_table
from .figspec import DEFAULT_COLORS, FigureKind, FigureSpec

_PROTOCOL_ORDER = tuple(DEFAULT_COLORS)
_PNG_METADATA = {"Software": "plotkit"}

_AXIS_LABEL = {"theta_over_pi": r"$\theta/\pi$", "delta_over_pi": r"$\delta/\pi$"}


def _by_protocol(rows: list[TableRow], colors) -> dict[str, list[TableRow]]:
    grouped: dict[str, list[TableRow]] = {}
    for row in rows:
        if row.protocol not in colors:
            known = ", ".join(_PROTOCOL_ORDER)
            raise DataError(f"unknown protocol {row.protocol!r} in table, "
                            f"expected one of {known}")
        grouped.setdefault(row.protocol, []).append(row)
    return {name: grouped[name] for name in _PROTOCOL_ORDER if name in grouped}


def _single_value(rows, field, what):
    values = sorted({getattr(row, field) for row in rows})
    if len(values) != 1:
        raise DataError(f"expected a single {what} value for this figure, "
                        f"found {len(values)}")
    return values[0]


def _series(rows, x_field, y_field, err_field=None):
    """Sorted (x, y, yerr) arrays for rows where y is present."""
    kept = [row for row in rows if getattr(row, y_field) is not None]
    kept.sort(key=lambda row: getattr(row, x_field))
    x = np.array([getattr(row, x_field) for row in kept])
    y = np.array([getattr(row, y_field) for row in kept])
    if err_field is None:
        return x, y, None
    raw = [getattr(row, err_field) for row in kept]
    if all(value is None for value in raw):
        return x, y, None
    return x, y, np.array([0.0 if value is None else value for value in raw])


def _plot_panel(ax, grouped, colors, x_field, y_field, err_field, ylabel):
    summary = {}
    for name, rows in grouped.items():
        x, y, err = _series(rows, x_field, y_field, err_field)
        if x.size == 0:
            continue
        if err is None:
            ax.plot(x, y, "o-", ms=3, lw=1.2, color=colors[name], label=name)
        else:
            ax.errorbar(x, y, yerr=err, fmt="o-", ms=3, lw=1.2, capsize=2,
                        color=colors[name], label=name)
        summary[name] = {"x": x.tolist(), "y": y.tolist()}
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return summary


def _render_curves(spec: FigureSpec, rows: list[TableRow]) -> dict:
    if spec.kind is FigureKind.CURVES_VS_THETA:
        x_field, fixed_field, fixed_name = "theta_over_pi", "delta", "delta"
    else:
        x_field, fixed_field, fixed_name = "delta_over_pi", "theta", "theta"
    fixed = _single_value(rows, fixed_field, fixed_name)
    noise = _single_value(rows, "p", "noise")
    grouped = _by_protocol(rows, spec.colors)

    has_c = any(row.c_param is not None for row in rows)
    panel_count = 3 if has_c else 2
    fig, axes = plt.subplots(panel_count, 1, sharex=True,
                             figsize=(6.4, 2.6 * panel_count))
    series = {"rate": _plot_panel(axes[0], grouped, spec.colors, x_field,
                                  "rate_clamped", None, "secret key rate"),
              "qber": _plot_panel(axes[1], grouped, spec.colors, x_field,
                                  "qber", "qber_err", "QBER")}
    if not series["rate"]:
        plt.close(fig)
        raise DataError("no plottable rows: every rate cell is empty")
    if has_c:
        series["c_param"] = _plot_panel(axes[2], grouped, spec.colors, x_field,
                                        "c_param", "c_param_err", "C")
    axes[0].legend(loc="best", fontsize=8)
    axes[-1].set_xlabel(_AXIS_LABEL[x_field])
    axes[0].set_title(f"p = {noise:g}, {fixed_name} = {fixed:g} rad")
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi, metadata=_PNG_METADATA)
    plt.close(fig)
    return {"kind": spec.kind.value, "output": spec.output_path,
            "series": series}


def _grid_axes(rows, field):
    return np.array(sorted({getattr(row, field) for row in rows}))


def _render_surface(spec: FigureSpec, rows: list[TableRow]) -> dict:
    z_field = "qber" if spec.kind is FigureKind.SURFACE_QBER else "rate_clamped"
    grouped = _by_protocol(rows, spec.colors)
    thetas = _grid_axes(rows, "theta_over_pi")
    deltas = _grid_axes(rows, "delta_over_pi")
    if thetas.size < 2 or deltas.size < 2:
        raise DataError("surface figures need a 2D grid with at least "
                        "2 values per axis")
    theta_index = {value: i for i, value in enumerate(thetas)}
    delta_index = {value: j for j, value in enumerate(deltas)}

    fig = plt.figure(figsize=(7.2, 5.4))
    ax = fig.add_subplot(projection="3d")
    mesh_d, mesh_t = np.meshgrid(deltas, thetas)
    series = {}
    for name, protocol_rows in grouped.items():
        z = np.full((thetas.size, deltas.size), np.nan)
        for row in protocol_rows:
            value = getattr(row, z_field)
            if value is None:
                raise DataError(f"{name}: empty {z_field} cell at theta/pi="
                                f"{row.theta_over_pi:g}, delta/pi="
                                f"{row.delta_over_pi:g}")
            z[theta_index[row.theta_over_pi], delta_index[row.delta_over_pi]] \
                = value
        if np.isnan(z).any():
            raise DataError(f"{name}: rows do not cover the full "
                            f"{thetas.size}x{deltas.size} grid")
        ax.plot_surface(mesh_t, mesh_d, z, color=spec.colors[name],
                        alpha=0.75, linewidth=0, antialiased=False)
        series[name] = {"theta": thetas.tolist(), "delta": deltas.tolist(),
                        "z": z.tolist()}
    ax.set_xlabel(_AXIS_LABEL["theta_over_pi"])
    ax.set_ylabel(_AXIS_LABEL["delta_over_pi"])
    ax.set_zlabel("QBER" if z_field == "qber" else "secret key rate")
    handles = [Patch(color=spec.colors[name], label=name) for name in series]
    ax.legend(handles=handles, loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output_path, dpi=spec.dpi, metadata=_PNG_METADATA)
    plt.close(fig)
    return {"kind": spec.kind.value, "output": spec.output_path,
            "series": series}


def render(spec: FigureSpec) -> dict:
    """Write the figure and return the plotted series for inspection.

    The summary maps panel (curves) or protocol (surfaces) to the exact
    numbers handed to matplotlib, so flatness and value checks need no
    image parsing.
    """
    rows = read_table(spec.input_csv)
    if spec.kind in (FigureKind.CURVES_VS_THETA, FigureKind.CURVES_VS_DELTA):
        return _render_curves(spec, rows)
    return _render_surface(spec, rows)
