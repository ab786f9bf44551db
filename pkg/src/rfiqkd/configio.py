"""Flat key=value run configuration with section headers.

One file fully determines a run. Angles may be written as raw radians
("0.596") or as multiples of pi ("0.19pi"); everything else is plain
numbers. Unknown sections or keys are rejected, not ignored, so a typo
cannot silently fall back to a default.
"""

import configparser
import math

from .montecarlo import DetectorConfig, SourceConfig
from .rates import ProtocolKind, SweepVariable
from .sweep import (
    AxisRange,
    DEFAULT_MIXING_SESSIONS,
    MonteCarloSettings,
    SweepMode,
    SweepSpec,
)


class ConfigError(ValueError):
    """Raised with a '[section] key' locator for any config problem."""


_SWEEP_KEYS = {"mode", "variable", "protocols", "start", "stop", "steps",
               "theta_start", "theta_stop", "theta_steps",
               "delta_start", "delta_stop", "delta_steps"}
_CHANNEL_KEYS = {"p", "theta", "delta"}
_MC_KEYS = {"pulses", "mean_photon_number", "efficiency", "dark_count_prob",
            "basis_probabilities", "seed", "grid_mixing", "mixing_sessions"}
_OUTPUT_KEYS = {"csv", "json", "tally_dir"}
_SECTIONS = {"sweep": _SWEEP_KEYS, "channel": _CHANNEL_KEYS,
             "montecarlo": _MC_KEYS, "output": _OUTPUT_KEYS}

_BOOLEANS = {"true": True, "yes": True, "1": True,
             "false": False, "no": False, "0": False}


def parse_angle(text: str) -> float:
    """Radians from '0.25pi', 'pi', '-pi', or a plain float string."""
    token = text.strip().lower()
    if token.endswith("pi"):
        head = token[:-2].strip()
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    return float(token)


class _Section:
    """One config section with typed, error-located accessors."""

    def __init__(self, name: str, values: dict[str, str]):
        self.name = name
        self.values = values

    def _locate(self, key):
        return f"[{self.name}] {key}"

    def raw(self, key: str, default=None):
        return self.values.get(key, default)

    def has(self, key: str) -> bool:
        return key in self.values

    def typed(self, key: str, convert, default=None, what="value"):
        text = self.raw(key)
        if text is None:
            if default is None:
                raise ConfigError(f"{self._locate(key)}: missing required key")
            return default
        try:
            return convert(text)
        except (ValueError, TypeError):
            raise ConfigError(
                f"{self._locate(key)}: not a valid {what}: {text!r}") from None

    def angle(self, key, default=None):
        return self.typed(key, parse_angle, default, "angle")

    def number(self, key, default=None):
        return self.typed(key, float, default, "number")

    def integer(self, key, default=None):
        return self.typed(key, int, default, "integer")

    def boolean(self, key, default=None):
        def convert(text):
            return _BOOLEANS[text.strip().lower()]
        return self.typed(key, convert, default, "boolean")


def _load_sections(path: str) -> dict[str, _Section]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    sections = {}
    for name in parser.sections():
        known = _SECTIONS.get(name)
        if known is None:
            raise ConfigError(f"{path}: unknown section [{name}]")
        values = dict(parser.items(name))
        for key in values:
            if key not in known:
                raise ConfigError(f"{path}: [{name}] {key}: unknown key")
        sections[name] = _Section(name, values)
    return sections


def _parse_protocols(section: _Section) -> tuple[ProtocolKind, ...]:
    text = section.raw("protocols")
    if text is None:
        return tuple(ProtocolKind)
    labels = text.replace(",", " ").split()
    if not labels:
        raise ConfigError("[sweep] protocols: empty list")
    kinds = []
    for label in labels:
        try:
            kinds.append(ProtocolKind(label.upper()))
        except ValueError:
            names = ", ".join(k.value for k in ProtocolKind)
            raise ConfigError(f"[sweep] protocols: unknown protocol "
                              f"{label!r}, expected one of {names}") from None
    return tuple(kinds)


def _axis_range(section: _Section, prefix: str) -> AxisRange | None:
    keys = [f"{prefix}start", f"{prefix}stop", f"{prefix}steps"]
    present = [k for k in keys if section.has(k)]
    if not present:
        return None
    if len(present) != 3:
        missing = sorted(set(keys) - set(present))
        raise ConfigError(f"[sweep]: range needs all of {keys}, missing {missing}")
    try:
        return AxisRange(start=section.angle(keys[0]),
                         stop=section.angle(keys[1]),
                         steps=section.integer(keys[2]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[sweep] {prefix}start/stop/steps: {exc}") from None


def _parse_mc(section: _Section | None, mode: SweepMode) -> MonteCarloSettings | None:
    if mode is SweepMode.ANALYTIC:
        if section is not None:
            raise ConfigError(
                "[montecarlo]: section present but mode is analytic")
        return None
    if section is None:
        raise ConfigError("[montecarlo]: section required when mode is montecarlo")
    probs_text = section.raw("basis_probabilities")
    if probs_text is None:
        probs = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    else:
        parts = probs_text.replace(",", " ").split()
        try:
            probs = tuple(float(part) for part in parts)
        except ValueError:
            raise ConfigError("[montecarlo] basis_probabilities: "
                              f"not numbers: {probs_text!r}") from None
    try:
        source = SourceConfig(
            pulse_count=section.integer("pulses"),
            mean_photon_number=section.number("mean_photon_number", 0.5))
        detector = DetectorConfig(
            efficiency=section.number("efficiency", 1.0),
            dark_count_prob=section.number("dark_count_prob", 0.0),
            basis_probabilities=probs)
        return MonteCarloSettings(
            source=source, detector=detector,
            seed=section.integer("seed"),
            grid_mixing=section.boolean("grid_mixing", False),
            mixing_sessions=section.integer("mixing_sessions",
                                            DEFAULT_MIXING_SESSIONS))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[montecarlo]: {exc}") from None


def load_spec(path: str) -> tuple[SweepSpec, dict[str, str]]:
    """Parse a config file into a SweepSpec plus its [output] mapping."""
    sections = _load_sections(path)
    sweep_sec = sections.get("sweep")
    if sweep_sec is None:
        raise ConfigError(f"{path}: missing [sweep] section")
    channel = sections.get("channel")
    if channel is None:
        raise ConfigError(f"{path}: missing [channel] section")

    mode_text = sweep_sec.raw("mode")
    if mode_text is None:
        raise ConfigError("[sweep] mode: missing required key")
    try:
        mode = SweepMode(mode_text.strip().lower())
    except ValueError:
        raise ConfigError(f"[sweep] mode: expected analytic or montecarlo, "
                          f"got {mode_text!r}") from None
    variable_text = sweep_sec.raw("variable")
    if variable_text is None:
        raise ConfigError("[sweep] variable: missing required key")
    try:
        variable = SweepVariable(variable_text.strip().lower())
    except ValueError:
        raise ConfigError(f"[sweep] variable: expected rotation, fluctuation "
                          f"or grid2d, got {variable_text!r}") from None

    if variable is SweepVariable.GRID2D:
        for key in ("start", "stop", "steps"):
            if sweep_sec.has(key):
                raise ConfigError(f"[sweep] {key}: use theta_*/delta_* "
                                  "keys for a grid2d sweep")
        theta_range = _axis_range(sweep_sec, "theta_")
        delta_range = _axis_range(sweep_sec, "delta_")
        if theta_range is None or delta_range is None:
            raise ConfigError("[sweep]: grid2d needs theta_ and delta_ ranges")
    else:
        for key in _SWEEP_KEYS:
            if ("theta_" in key or "delta_" in key) and sweep_sec.has(key):
                raise ConfigError(f"[sweep] {key}: only valid for grid2d sweeps")
        shared = _axis_range(sweep_sec, "")
        if shared is None:
            raise ConfigError("[sweep]: start/stop/steps required")
        theta_range = shared if variable is SweepVariable.ROTATION else None
        delta_range = shared if variable is SweepVariable.FLUCTUATION else None

    fixed_theta = channel.angle("theta") if channel.has("theta") else None
    fixed_delta = channel.angle("delta") if channel.has("delta") else None
    if theta_range is not None and fixed_theta is not None:
        raise ConfigError("[channel] theta: swept variable cannot be fixed")
    if delta_range is not None and fixed_delta is not None:
        raise ConfigError("[channel] delta: swept variable cannot be fixed")

    mc = _parse_mc(sections.get("montecarlo"), mode)

    try:
        spec = SweepSpec(mode=mode, variable=variable,
                         p=channel.number("p"),
                         theta_range=theta_range, delta_range=delta_range,
                         theta=fixed_theta, delta=fixed_delta,
                         protocols=_parse_protocols(sweep_sec), mc=mc)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None

    output = {}
    out_sec = sections.get("output")
    if out_sec is not None:
        for key in _OUTPUT_KEYS:
            value = out_sec.raw(key)
            if value is not None:
                output[key] = value
    if "csv" not in output:
        raise ConfigError(f"{path}: [output] csv: missing required key")
    return spec, output
