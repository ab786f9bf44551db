"""Grid sweeps over frame parameters, analytic and Monte Carlo."""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import FrameParams
from .montecarlo import (
    DetectorConfig,
    EstimateReport,
    InsufficientStatisticsError,
    SessionTally,
    SourceConfig,
    estimate,
    midpoint_grid,
    mix_sessions,
    run_session,
)
from .polarization import BasisAxis
from .rates import (
    ProtocolKind,
    SweepVariable,
    _PROTOCOL_BASES,
    c_parameter,
    key_rate,
    qber_basis,
    qber_protocol,
)

DEFAULT_MIXING_SESSIONS = 33


class SweepMode(enum.Enum):
    ANALYTIC = "analytic"
    MONTECARLO = "montecarlo"


@dataclass(frozen=True)
class AxisRange:
    """Inclusive linspace description for one swept angle, in radians."""

    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("range endpoints must be finite")
        if self.start >= self.stop:
            raise ValueError(
                f"range start must be below stop, got [{self.start}, {self.stop}]")
        if self.steps < 2:
            raise ValueError(f"need at least 2 steps, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class MonteCarloSettings:
    source: SourceConfig
    detector: DetectorConfig
    seed: int
    grid_mixing: bool = False
    mixing_sessions: int = DEFAULT_MIXING_SESSIONS

    def __post_init__(self):
        if self.mixing_sessions < 1:
            raise ValueError("mixing_sessions must be positive")
        if self.grid_mixing and self.source.pulse_count < self.mixing_sessions:
            raise ValueError("grid mixing needs at least one pulse per session")


@dataclass(frozen=True)
class SweepSpec:
    """Fully determines one sweep run.

    The swept angle(s) get an AxisRange; every angle that is not swept must
    be pinned by its fixed value, and the two are mutually exclusive per
    axis. Noise p is never swept here.
    """

    mode: SweepMode
    variable: SweepVariable
    p: float
    theta_range: AxisRange | None = None
    delta_range: AxisRange | None = None
    theta: float | None = None
    delta: float | None = None
    protocols: tuple[ProtocolKind, ...] = tuple(ProtocolKind)
    mc: MonteCarloSettings | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"noise probability must lie in [0, 1], got {self.p}")
        if not self.protocols:
            raise ValueError("at least one protocol required")
        if len(set(self.protocols)) != len(self.protocols):
            raise ValueError("duplicate protocol in sweep")
        swept_theta = self.variable in (SweepVariable.ROTATION, SweepVariable.GRID2D)
        swept_delta = self.variable in (SweepVariable.FLUCTUATION, SweepVariable.GRID2D)
        for name, swept, rng, fixed in (
                ("theta", swept_theta, self.theta_range, self.theta),
                ("delta", swept_delta, self.delta_range, self.delta)):
            if swept:
                if rng is None:
                    raise ValueError(f"{name} is swept but has no range")
                if fixed is not None:
                    raise ValueError(f"{name} is swept, fixed value not allowed")
            else:
                if rng is not None:
                    raise ValueError(f"{name} is not swept, range not allowed")
                if fixed is None:
                    raise ValueError(f"{name} is not swept and needs a fixed value")
        if self.delta is not None and self.delta < 0.0:
            raise ValueError("fixed delta must be non-negative")
        if self.delta_range is not None and self.delta_range.start < 0.0:
            raise ValueError("delta range must be non-negative")
        if self.mode is SweepMode.MONTECARLO and self.mc is None:
            raise ValueError("montecarlo mode needs montecarlo settings")
        if self.mode is SweepMode.ANALYTIC and self.mc is not None:
            raise ValueError("montecarlo settings given but mode is analytic")

    def grid_points(self) -> list[tuple[float, float]]:
        """(theta, delta) pairs in output order: theta-major, delta-minor."""
        thetas = self.theta_range.values() if self.theta_range is not None \
            else np.array([self.theta])
        deltas = self.delta_range.values() if self.delta_range is not None \
            else np.array([self.delta])
        return [(float(t), float(d)) for t in thetas for d in deltas]


@dataclass(frozen=True)
class SweepRow:
    """One grid point evaluated for one protocol.

    Error columns are None in analytic mode; every value column is None on
    rows whose Monte Carlo estimation had empty sifted cells.
    """

    theta: float
    delta: float
    p: float
    protocol: ProtocolKind
    qber: float | None
    qber_err: float | None
    c_param: float | None
    c_param_err: float | None
    rate_raw: float | None
    rate_clamped: float | None


@dataclass(frozen=True)
class CrossCheck:
    """3-sigma agreement tally between MC estimates and closed form."""

    checked: int
    within: int

    @property
    def fraction(self) -> float:
        return self.within / self.checked if self.checked else float("nan")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    warnings: tuple[str, ...] = ()
    crosscheck: CrossCheck | None = None
    tallies: tuple[SessionTally, ...] | None = None


def _analytic_rows(spec: SweepSpec, frame: FrameParams) -> list[SweepRow]:
    rows = []
    for kind in spec.protocols:
        if kind is ProtocolKind.RFI:
            q = qber_basis(BasisAxis.Z, frame)
            c = c_parameter(frame)
        else:
            q = qber_protocol(kind, frame).q_protocol
            c = None
        rate = key_rate(kind, frame)
        rows.append(SweepRow(
            theta=frame.theta, delta=frame.delta, p=frame.p, protocol=kind,
            qber=q, qber_err=None, c_param=c, c_param_err=None,
            rate_raw=rate.rate, rate_clamped=rate.rate_clamped))
    return rows


def _mc_point_tally(mc: MonteCarloSettings, frame: FrameParams,
                    point_index: int) -> SessionTally:
    seed = mc.seed + point_index
    if not mc.grid_mixing:
        return run_session(mc.source, mc.detector, frame, seed)
    count = mc.mixing_sessions
    phis = midpoint_grid(frame.theta, frame.delta, count)
    base, extra = divmod(mc.source.pulse_count, count)
    tallies = []
    for k, phi in enumerate(phis):
        sub = replace(mc.source, pulse_count=base + (1 if k < extra else 0))
        tallies.append(run_session(sub, mc.detector,
                                   FrameParams(frame.p, phi, 0.0),
                                   seed * 1000003 + k))
    return mix_sessions(tallies, [1.0 / count] * count)


_AXIS_KEY = {BasisAxis.X: "x", BasisAxis.Y: "y", BasisAxis.Z: "z"}


def _mc_rows(spec: SweepSpec, frame: FrameParams,
             report: EstimateReport) -> list[SweepRow]:
    rows = []
    for kind in spec.protocols:
        if kind is ProtocolKind.RFI:
            q, q_err = report.qber["z"], report.qber_err["z"]
            c, c_err = report.c, report.c_err
        else:
            keys = [_AXIS_KEY[b] for b in _PROTOCOL_BASES[kind]]
            q = sum(report.qber[k] for k in keys) / len(keys)
            q_err = math.hypot(*(report.qber_err[k] for k in keys)) / len(keys)
            c = c_err = None
        rows.append(SweepRow(
            theta=frame.theta, delta=frame.delta, p=frame.p, protocol=kind,
            qber=q, qber_err=q_err, c_param=c, c_param_err=c_err,
            rate_raw=report.rates[kind],
            rate_clamped=report.rates_clamped[kind]))
    return rows


def _failed_rows(spec: SweepSpec, frame: FrameParams) -> list[SweepRow]:
    return [SweepRow(theta=frame.theta, delta=frame.delta, p=frame.p,
                     protocol=kind, qber=None, qber_err=None, c_param=None,
                     c_param_err=None, rate_raw=None, rate_clamped=None)
            for kind in spec.protocols]


def _crosscheck_point(frame: FrameParams, report: EstimateReport,
                      counts: list[int]) -> None:
    targets = [(report.qber[_AXIS_KEY[axis]], report.qber_err[_AXIS_KEY[axis]],
                qber_basis(axis, frame)) for axis in BasisAxis]
    targets.append((report.c, report.c_err, c_parameter(frame)))
    for got, err, want in targets:
        counts[0] += 1
        agrees = (got == want) if err == 0.0 else abs(got - want) <= 3.0 * err
        if agrees:
            counts[1] += 1


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the grid, one row per point per protocol, order-stable.

    Monte Carlo points that leave some sifted cell empty produce rows with
    empty value columns and a warning instead of aborting the sweep.
    """
    rows: list[SweepRow] = []
    warnings: list[str] = []
    if spec.mode is SweepMode.ANALYTIC:
        for theta, delta in spec.grid_points():
            rows.extend(_analytic_rows(spec, FrameParams(spec.p, theta, delta)))
        return SweepResult(rows=tuple(rows))

    tallies: list[SessionTally] = []
    counts = [0, 0]
    for index, (theta, delta) in enumerate(spec.grid_points()):
        frame = FrameParams(spec.p, theta, delta)
        tally = _mc_point_tally(spec.mc, frame, index)
        tallies.append(tally)
        try:
            report = estimate(tally)
        except InsufficientStatisticsError as exc:
            warnings.append(
                f"point {index} (theta={theta:.6g}, delta={delta:.6g}): {exc}")
            rows.extend(_failed_rows(spec, frame))
            continue
        rows.extend(_mc_rows(spec, frame, report))
        _crosscheck_point(frame, report, counts)
    return SweepResult(rows=tuple(rows), warnings=tuple(warnings),
                       crosscheck=CrossCheck(checked=counts[0], within=counts[1]),
                       tallies=tuple(tallies))
