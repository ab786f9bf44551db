"""Pulse-level Monte Carlo of the six-state polarization apparatus.

A weak-coherent source prepares one of six polarizations per pulse; each
photon crosses the depolarizing, frame-rotated channel and is measured
passively against one of three bases, clicking one of six detectors. The
engine produces coincidence tallies, estimates error rates, correlators, the
check parameter C, and key rates from counts, and supports the
statistical-mixing procedure that emulates frame fluctuation by combining
fixed-rotation sessions.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import FrameParams
from .rates import ProtocolKind, binary_entropy, eve_information

# Preparation / detector indexing: H, V, D, A, R, L.
STATE_LABELS = ("H", "V", "D", "A", "R", "L")
# Axis codes used in count post-processing: 0 = X, 1 = Y, 2 = Z.
_AXIS_OF_STATE = np.array([2, 2, 0, 0, 1, 1])
_SIGN_OF_STATE = np.array([1, -1, 1, -1, 1, -1])
# First detector index for each measured axis (X -> D, Y -> R, Z -> H).
_AXIS_DETECTOR_BASE = np.array([2, 4, 0])

_BLOCK_PULSES = 1 << 18
WORKERS_ENV_VAR = "RFIQKD_WORKERS"

_TALLY_HEADER = "rfiqkd-tally 1"


@dataclass(frozen=True)
class SourceConfig:
    """Pulsed source: Poisson photon number, uniform choice of six states."""

    pulse_count: int
    mean_photon_number: float = 0.5

    def __post_init__(self):
        if self.pulse_count < 1:
            raise ValueError(f"pulse_count must be >= 1, got {self.pulse_count}")
        if not self.mean_photon_number > 0.0:
            raise ValueError(f"mean photon number must be > 0, "
                             f"got {self.mean_photon_number}")


@dataclass(frozen=True)
class DetectorConfig:
    """Six-detector receiver with passive basis choice.

    basis_probabilities orders the measured axes (X, Y, Z).
    """

    efficiency: float = 1.0
    dark_count_prob: float = 0.0
    basis_probabilities: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_count_prob < 1.0:
            raise ValueError(f"dark count probability must be in [0, 1), "
                             f"got {self.dark_count_prob}")
        probs = tuple(float(x) for x in self.basis_probabilities)
        if len(probs) != 3 or any(x < 0.0 for x in probs):
            raise ValueError("basis_probabilities must be three non-negative reals")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"basis_probabilities must sum to 1, got {sum(probs)}")
        object.__setattr__(self, "basis_probabilities", probs)


@dataclass(frozen=True, eq=False)
class SessionTally:
    """Coincidence table of one session.

    counts[prepared_state][detector] holds pulses resolved to single
    outcomes; pulses where two or more distinct detectors fired are kept in
    counts after a uniform random choice among the fired detectors, and
    discarded_double_clicks records how many such resolutions happened
    (diagnostic, not a discard). discarded_no_click counts pulses with no
    click at all. frame and seed are metadata; both are None for mixed
    tallies.
    """

    counts: np.ndarray
    sent_per_state: np.ndarray
    discarded_no_click: int
    discarded_double_clicks: int
    source: SourceConfig
    detector: DetectorConfig
    frame: FrameParams | None = None
    seed: int | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        sent = np.asarray(self.sent_per_state, dtype=np.int64)
        if counts.shape != (6, 6):
            raise ValueError(f"counts must be 6x6, got shape {counts.shape}")
        if sent.shape != (6,):
            raise ValueError(f"sent_per_state must have 6 entries, got {sent.shape}")
        if counts.min() < 0 or sent.min() < 0:
            raise ValueError("counts must be non-negative")
        if self.discarded_no_click < 0 or self.discarded_double_clicks < 0:
            raise ValueError("discard counters must be non-negative")
        row_totals = counts.sum(axis=1)
        if np.any(row_totals > sent):
            raise ValueError("resolved counts exceed pulses sent for some state")
        if row_totals.sum() + self.discarded_no_click != sent.sum():
            raise ValueError("resolved + no-click pulses must equal pulses sent")
        if sent.sum() != self.source.pulse_count:
            raise ValueError(f"sent_per_state sums to {sent.sum()}, "
                             f"config says {self.source.pulse_count} pulses")
        counts = counts.copy()
        sent = sent.copy()
        counts.setflags(write=False)
        sent.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "sent_per_state", sent)

    def no_click_per_state(self) -> np.ndarray:
        return self.sent_per_state - self.counts.sum(axis=1)


@dataclass(frozen=True)
class EstimateReport:
    """Count-derived estimates with binomial standard errors.

    qber/qber_err are keyed "x", "y", "z"; correlators/correlator_errs are
    keyed by sender-receiver axis pairs "xx", "xy", "yx", "yy", "zz";
    sifted_counts gives the matched-cell totals behind each correlator.
    rates hold raw key rates per protocol, rates_clamped the zero floors.
    """

    qber: dict[str, float]
    qber_err: dict[str, float]
    correlators: dict[str, float]
    correlator_errs: dict[str, float]
    sifted_counts: dict[str, int]
    c: float
    c_err: float
    rates: dict[ProtocolKind, float]
    rates_clamped: dict[ProtocolKind, float]


class InsufficientStatisticsError(ValueError):
    """Raised when a required coincidence cell group holds no counts."""


def _poisson_cap(mu: float) -> int:
    # Smallest n with CDF(n) > 1 - 1e-12; bounds per-pulse work.
    term = np.exp(-mu)
    cdf = term
    n = 0
    while cdf <= 1.0 - 1e-12:
        n += 1
        term *= mu / n
        cdf += term
    return n


@dataclass(frozen=True)
class _UniformPhi:
    # Picklable per-pulse rotation sampler (closures cannot cross the
    # process-pool boundary).
    theta: float
    delta: float

    def __call__(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.delta == 0.0:
            return np.full(size, self.theta)
        return rng.uniform(self.theta - self.delta, self.theta + self.delta, size)


def _run_block(source: SourceConfig, detector: DetectorConfig, p: float,
               phi_sampler, seed: int, block_index: int, n_pulses: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block_index,)))
    contrast = 1.0 - p
    eff = detector.efficiency
    dark = detector.dark_count_prob
    cum_basis = np.cumsum(detector.basis_probabilities)

    prepared = rng.integers(0, 6, n_pulses)
    photons = np.minimum(rng.poisson(source.mean_photon_number, n_pulses),
                         _poisson_cap(source.mean_photon_number))
    phis = phi_sampler(rng, n_pulses)

    pulse_of_photon = np.repeat(np.arange(n_pulses), photons)
    total = pulse_of_photon.size
    basis = np.searchsorted(cum_basis, rng.random(total), side="right")
    basis = np.minimum(basis, 2)

    prep_axis = _AXIS_OF_STATE[prepared][pulse_of_photon]
    prep_sign = _SIGN_OF_STATE[prepared][pulse_of_photon]
    phi = phis[pulse_of_photon]

    # Mean value of the measured observable in the prepared state after the
    # channel: sign * (1-p) * (rotated-axis component along the prepared axis).
    overlap = np.zeros(total)
    xx = (prep_axis == 0) & (basis == 0)
    yx = (prep_axis == 1) & (basis == 0)
    xy = (prep_axis == 0) & (basis == 1)
    yy = (prep_axis == 1) & (basis == 1)
    zz = (prep_axis == 2) & (basis == 2)
    overlap[xx] = np.cos(phi[xx])
    overlap[yx] = np.sin(phi[yx])
    overlap[xy] = -np.sin(phi[xy])
    overlap[yy] = np.cos(phi[yy])
    overlap[zz] = 1.0
    p_plus = 0.5 * (1.0 + prep_sign * contrast * overlap)

    outcome_minus = rng.random(total) >= p_plus
    det_index = _AXIS_DETECTOR_BASE[basis] + outcome_minus

    if eff < 1.0:
        kept = rng.random(total) < eff
        pulse_clicked = pulse_of_photon[kept]
        det_clicked = det_index[kept]
    else:
        pulse_clicked = pulse_of_photon
        det_clicked = det_index

    clicks = np.zeros((n_pulses, 6), dtype=bool)
    clicks[pulse_clicked, det_clicked] = True
    if dark > 0.0:
        clicks |= rng.random((n_pulses, 6)) < dark

    fired = clicks.sum(axis=1)
    pick = rng.random(n_pulses)
    # Uniform choice among fired detectors: first column index where the
    # running count reaches the picked rank.
    rank = np.minimum((pick * fired).astype(np.int64), np.maximum(fired - 1, 0)) + 1
    running = clicks.cumsum(axis=1)
    chosen = np.argmax((running == rank[:, None]) & clicks, axis=1)

    resolved = fired >= 1
    counts = np.zeros((6, 6), dtype=np.int64)
    np.add.at(counts, (prepared[resolved], chosen[resolved]), 1)
    sent = np.bincount(prepared, minlength=6).astype(np.int64)
    return (counts, sent, int((fired == 0).sum()), int((fired >= 2).sum()))


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{WORKERS_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(n, 1)


def _run_session_sampled(source: SourceConfig, detector: DetectorConfig,
                         p: float, phi_sampler, seed: int,
                         frame: FrameParams | None) -> SessionTally:
    n_blocks = (source.pulse_count + _BLOCK_PULSES - 1) // _BLOCK_PULSES
    sizes = [min(_BLOCK_PULSES, source.pulse_count - i * _BLOCK_PULSES)
             for i in range(n_blocks)]
    args = [(source, detector, p, phi_sampler, seed, i, sizes[i])
            for i in range(n_blocks)]

    workers = _worker_count()
    if workers > 1 and n_blocks > 1:
        with ProcessPoolExecutor(max_workers=min(workers, n_blocks)) as pool:
            results = list(pool.map(_run_block_star, args))
    else:
        results = [_run_block(*a) for a in args]

    counts = np.zeros((6, 6), dtype=np.int64)
    sent = np.zeros(6, dtype=np.int64)
    no_click = 0
    double_clicks = 0
    for c, s, nc, dc in results:
        counts += c
        sent += s
        no_click += nc
        double_clicks += dc
    return SessionTally(counts=counts, sent_per_state=sent,
                        discarded_no_click=no_click,
                        discarded_double_clicks=double_clicks,
                        source=source, detector=detector, frame=frame, seed=seed)


def _run_block_star(args):
    return _run_block(*args)


def run_session(source: SourceConfig, detector: DetectorConfig,
                frame: FrameParams, seed: int) -> SessionTally:
    """Simulate one session and return its coincidence tally.

    Per pulse: a uniform choice among the six prepared states, a Poisson
    photon number, one frame-rotation draw; per photon: a passive basis
    choice, a Born-rule outcome against the rotated axes contracted by the
    depolarizing probability, and an efficiency draw. Dark counts fire
    independently per detector. Deterministic given the seed: pulses are
    processed in fixed-size blocks with per-block substreams, so the result
    does not depend on the worker count.
    """
    return _run_session_sampled(source, detector, frame.p,
                                _UniformPhi(frame.theta, frame.delta), seed, frame)


# (sender-axis, receiver-axis) code pairs estimated from counts.
_CORRELATOR_PAIRS = {"xx": (0, 0), "xy": (0, 1), "yx": (1, 0),
                     "yy": (1, 1), "zz": (2, 2)}
_STATES_OF_AXIS = {0: (2, 3), 1: (4, 5), 2: (0, 1)}


def estimate(tally: SessionTally) -> EstimateReport:
    """Estimate error rates, correlators, C, and key rates from counts.

    Correlators use the eigenvalue sign convention (H, D, R positive):
    corr = (agree - disagree) / (agree + disagree). Standard errors are
    binomial; C's error is propagated to first order from the four
    cross-correlators. Raises InsufficientStatisticsError when a required
    cell group is empty.
    """
    correlators: dict[str, float] = {}
    correlator_errs: dict[str, float] = {}
    sifted: dict[str, int] = {}
    missing = []
    for key, (a, b) in _CORRELATOR_PAIRS.items():
        total = 0
        agree = 0
        for s in _STATES_OF_AXIS[a]:
            for d in _STATES_OF_AXIS[b]:
                n = int(tally.counts[s, d])
                total += n
                if _SIGN_OF_STATE[s] * _SIGN_OF_STATE[d] == 1:
                    agree += n
        if total == 0:
            missing.append(key)
            continue
        q_dis = (total - agree) / total
        correlators[key] = 1.0 - 2.0 * q_dis
        correlator_errs[key] = 2.0 * np.sqrt(q_dis * (1.0 - q_dis) / total)
        sifted[key] = total
    if missing:
        raise InsufficientStatisticsError(
            "no sifted counts for sender-receiver axis pairs: "
            + ", ".join(missing))

    qber = {}
    qber_err = {}
    for axis_key, corr_key in (("x", "xx"), ("y", "yy"), ("z", "zz")):
        qber[axis_key] = 0.5 * (1.0 - correlators[corr_key])
        qber_err[axis_key] = 0.5 * correlator_errs[corr_key]

    cross = ("xx", "xy", "yx", "yy")
    c_val = sum(correlators[k] ** 2 for k in cross)
    c_err = float(np.sqrt(sum((2.0 * correlators[k] * correlator_errs[k]) ** 2
                              for k in cross)))

    def bb84(q: float) -> float:
        return 1.0 - 2.0 * binary_entropy(min(max(q, 0.0), 1.0))

    def six_state(q: float) -> float:
        if q == 0.0:
            return 1.0
        return (1.0 - binary_entropy(q) - q
                - (1.0 - q) * binary_entropy((1.0 - 1.5 * q) / (1.0 - q)))

    q_x, q_y, q_z = qber["x"], qber["y"], qber["z"]
    # Statistical noise can push the raw sum of squares past the physical
    # bound; clamp before the security bound evaluation.
    c_clamped = min(max(c_val, 0.0), 2.0)
    rates = {
        ProtocolKind.BB84_XY: bb84(0.5 * (q_x + q_y)),
        ProtocolKind.BB84_XZ: bb84(0.5 * (q_x + q_z)),
        ProtocolKind.SIX_STATE: six_state((q_x + q_y + q_z) / 3.0),
        ProtocolKind.RFI: 1.0 - binary_entropy(q_z)
        - eve_information(q_z, c_clamped).i_eve,
    }
    return EstimateReport(
        qber=qber, qber_err=qber_err,
        correlators=correlators, correlator_errs=correlator_errs,
        sifted_counts=sifted, c=float(c_val), c_err=c_err,
        rates=rates,
        rates_clamped={k: max(v, 0.0) for k, v in rates.items()},
    )


def _largest_remainder(values: np.ndarray, total: int) -> np.ndarray:
    floors = np.floor(values).astype(np.int64)
    short = total - int(floors.sum())
    if short < 0:
        raise ValueError("rounding target below floor sum")
    order = np.argsort(-(values - floors), kind="stable")
    out = floors.copy()
    out[order[:short]] += 1
    return out


def mix_sessions(tallies: list[SessionTally], weights: list[float]) -> SessionTally:
    """Weight-resampled aggregate of sessions taken under one apparatus.

    Emulates a fluctuating frame by combining fixed-rotation sessions: each
    input tally is rescaled to contribute its weight's share of the combined
    pulse total, with per-state largest-remainder rounding so conservation
    holds exactly. Equal weights over equal-length sessions reduce to plain
    summation. All tallies must share source and detector configs.
    """
    if not tallies:
        raise ValueError("need at least one tally to mix")
    if len(weights) != len(tallies):
        raise ValueError(f"{len(tallies)} tallies but {len(weights)} weights")
    w = np.asarray(weights, dtype=float)
    if w.min() < 0.0:
        raise ValueError("weights must be non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()}")
    first = tallies[0]
    for t in tallies[1:]:
        # pulse_count is per-session, not part of the apparatus
        same_source = replace(t.source, pulse_count=1) \
            == replace(first.source, pulse_count=1)
        if not same_source or t.detector != first.detector:
            raise ValueError("tallies come from different source/detector configs")

    totals = np.array([t.sent_per_state.sum() for t in tallies], dtype=float)
    grand = totals.sum()
    scale = w * grand / totals

    counts = np.zeros((6, 6), dtype=np.int64)
    sent = np.zeros(6, dtype=np.int64)
    no_click_total = 0
    for s in range(6):
        cells = np.zeros(7)
        for t, f in zip(tallies, scale):
            cells[:6] += f * t.counts[s]
            cells[6] += f * t.no_click_per_state()[s]
        row_total = int(round(cells.sum()))
        alloc = _largest_remainder(cells, row_total)
        counts[s] = alloc[:6]
        no_click_total += int(alloc[6])
        sent[s] = row_total
    double_clicks = int(round(sum(f * t.discarded_double_clicks
                                  for t, f in zip(tallies, scale))))
    source = replace(first.source, pulse_count=int(sent.sum()))
    return SessionTally(counts=counts, sent_per_state=sent,
                        discarded_no_click=no_click_total,
                        discarded_double_clicks=double_clicks,
                        source=source, detector=first.detector,
                        frame=None, seed=None)


def midpoint_grid(theta: float, delta: float, sessions: int) -> np.ndarray:
    """Fixed rotation angles whose equal-weight mix approximates the uniform
    fluctuation average: centers of equal-width strata of [theta-delta,
    theta+delta]. An endpoint-inclusive grid would overweight the interval
    edges and bias the average.
    """
    if sessions < 1:
        raise ValueError("need at least one session")
    lo = theta - delta
    width = 2.0 * delta
    return lo + (np.arange(sessions) + 0.5) * (width / sessions)


def _format_float(x: float) -> str:
    return repr(float(x))


def save_tally(tally: SessionTally, path: str) -> None:
    """Write a tally as a versioned plain-text table."""
    lines = [_TALLY_HEADER]
    lines.append(f"pulse_count {tally.source.pulse_count}")
    lines.append(f"mean_photon_number {_format_float(tally.source.mean_photon_number)}")
    lines.append(f"efficiency {_format_float(tally.detector.efficiency)}")
    lines.append(f"dark_count_prob {_format_float(tally.detector.dark_count_prob)}")
    lines.append("basis_probabilities "
                 + " ".join(_format_float(x) for x in tally.detector.basis_probabilities))
    if tally.frame is not None:
        lines.append(f"noise_p {_format_float(tally.frame.p)}")
        lines.append(f"theta {_format_float(tally.frame.theta)}")
        lines.append(f"delta {_format_float(tally.frame.delta)}")
    if tally.seed is not None:
        lines.append(f"seed {tally.seed}")
    lines.append("counts")
    for s in range(6):
        lines.append(" ".join(str(int(x)) for x in tally.counts[s]))
    lines.append("sent_per_state " + " ".join(str(int(x)) for x in tally.sent_per_state))
    lines.append(f"discarded_no_click {tally.discarded_no_click}")
    lines.append(f"discarded_double_clicks {tally.discarded_double_clicks}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


class TallyFormatError(ValueError):
    """Raised when a tally file does not match the expected layout."""


def load_tally(path: str) -> SessionTally:
    """Read a tally written by save_tally."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]

    def fail(lineno: int, message: str):
        raise TallyFormatError(f"{path}:{lineno}: {message}")

    if not lines or lines[0] != _TALLY_HEADER:
        fail(1, f"expected header {_TALLY_HEADER!r}")

    fields: dict[str, str] = {}
    counts_rows: list[list[int]] = []
    i = 1
    while i < len(lines) and lines[i] != "counts":
        parts = lines[i].split(None, 1)
        if len(parts) != 2:
            fail(i + 1, f"expected 'key value', got {lines[i]!r}")
        fields[parts[0]] = parts[1]
        i += 1
    if i == len(lines):
        fail(len(lines), "missing 'counts' block")
    i += 1
    for row in range(6):
        if i >= len(lines):
            fail(len(lines), "truncated counts block")
        try:
            values = [int(x) for x in lines[i].split()]
        except ValueError:
            fail(i + 1, f"counts row must be integers, got {lines[i]!r}")
        if len(values) != 6:
            fail(i + 1, f"counts row must have 6 entries, got {len(values)}")
        counts_rows.append(values)
        i += 1
    while i < len(lines) and lines[i]:
        parts = lines[i].split(None, 1)
        if len(parts) != 2:
            fail(i + 1, f"expected 'key value', got {lines[i]!r}")
        fields[parts[0]] = parts[1]
        i += 1

    def need(key: str) -> str:
        if key not in fields:
            raise TallyFormatError(f"{path}: missing field {key!r}")
        return fields[key]

    try:
        source = SourceConfig(pulse_count=int(need("pulse_count")),
                              mean_photon_number=float(need("mean_photon_number")))
        probs = tuple(float(x) for x in need("basis_probabilities").split())
        detector = DetectorConfig(efficiency=float(need("efficiency")),
                                  dark_count_prob=float(need("dark_count_prob")),
                                  basis_probabilities=probs)
        frame = None
        if "noise_p" in fields:
            frame = FrameParams(float(need("noise_p")), float(need("theta")),
                                float(need("delta")))
        seed = int(fields["seed"]) if "seed" in fields else None
        return SessionTally(
            counts=np.array(counts_rows, dtype=np.int64),
            sent_per_state=np.array([int(x) for x in need("sent_per_state").split()],
                                    dtype=np.int64),
            discarded_no_click=int(need("discarded_no_click")),
            discarded_double_clicks=int(need("discarded_double_clicks")),
            source=source, detector=detector, frame=frame, seed=seed)
    except TallyFormatError:
        raise
    except ValueError as exc:
        raise TallyFormatError(f"{path}: {exc}") from exc
