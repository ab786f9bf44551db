"""Figure specification: what to plot, from which table, to which file."""

import configparser
import enum
import re
from dataclasses import dataclass, field


class FigureKind(enum.Enum):
    SURFACE_QBER = "surface_qber"
    SURFACE_RATE = "surface_rate"
    CURVES_VS_THETA = "curves_vs_theta"
    CURVES_VS_DELTA = "curves_vs_delta"


# mirrors the reference palette: orange, blue, green, red
DEFAULT_COLORS = {
    "BB84_XY": "#e69f00",
    "BB84_XZ": "#0072b2",
    "SIX_STATE": "#009e73",
    "RFI": "#d55e00",
}

_HEX_COLOR = re.compile(r"^#[0-9a-fA-F]{6}$")


class SpecError(ValueError):
    """Raised with a '[figure] key' locator for any figure-spec problem."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    kind: FigureKind
    output_path: str
    colors: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLORS))
    dpi: int = 120

    def __post_init__(self):
        if self.dpi < 30:
            raise SpecError(f"dpi too small to render text: {self.dpi}")
        for protocol, color in self.colors.items():
            if not _HEX_COLOR.match(color):
                raise SpecError(f"color for {protocol} must be #rrggbb, "
                                f"got {color!r}")


_KEYS = {"input", "kind", "output", "dpi"} | {
    f"color_{name.lower()}" for name in DEFAULT_COLORS}


def load_figure_spec(path: str) -> FigureSpec:
    """Parse the flat key=value spec file (same shape as run configs)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise SpecError(f"{path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise SpecError(f"{path}: {exc}") from None

    if parser.sections() != ["figure"]:
        raise SpecError(f"{path}: expected exactly one [figure] section")
    values = dict(parser.items("figure"))
    for key in values:
        if key not in _KEYS:
            raise SpecError(f"[figure] {key}: unknown key")
    for key in ("input", "kind", "output"):
        if key not in values:
            raise SpecError(f"[figure] {key}: missing required key")
    try:
        kind = FigureKind(values["kind"].strip().lower())
    except ValueError:
        names = ", ".join(k.value for k in FigureKind)
        raise SpecError(f"[figure] kind: expected one of {names}, "
                        f"got {values['kind']!r}") from None

    colors = dict(DEFAULT_COLORS)
    for name in DEFAULT_COLORS:
        override = values.get(f"color_{name.lower()}")
        if override is not None:
            colors[name] = override.strip()
    dpi = 120
    if "dpi" in values:
        try:
            dpi = int(values["dpi"])
        except ValueError:
            raise SpecError(f"[figure] dpi: not an integer: "
                            f"{values['dpi']!r}") from None
    return FigureSpec(input_csv=values["input"], kind=kind,
                      output_path=values["output"], colors=colors, dpi=dpi)
