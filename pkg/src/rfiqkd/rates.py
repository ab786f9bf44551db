"""Closed-form error rates and asymptotic secret-key rates.

Covers four protocols: BB84 keyed on the X/Y basis pair, BB84 on X/Z,
six-state, and the frame-independent protocol that keys on Z and bounds the
eavesdropper through the X/Y cross-correlations. Includes the zero-rate
threshold finder used for misalignment tolerance tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import FrameParams, averaged_correlation, sinc
from .polarization import BasisAxis, Eigenvalue, eigenstate


class ProtocolKind(Enum):
    """Protocol label; fixes the basis set used for key and checks."""

    BB84_XY = "BB84_XY"
    BB84_XZ = "BB84_XZ"
    SIX_STATE = "SIX_STATE"
    RFI = "RFI"


# Basis sets entering each protocol's averaged error rate. The frame
# independent protocol has no averaged error rate: it keys on Z alone.
_PROTOCOL_BASES = {
    ProtocolKind.BB84_XY: (BasisAxis.X, BasisAxis.Y),
    ProtocolKind.BB84_XZ: (BasisAxis.X, BasisAxis.Z),
    ProtocolKind.SIX_STATE: (BasisAxis.X, BasisAxis.Y, BasisAxis.Z),
}


class SweepVariable(Enum):
    """Which channel parameter a sweep varies."""

    ROTATION = "rotation"
    FLUCTUATION = "fluctuation"
    GRID2D = "grid2d"


class NoZeroCrossingError(ValueError):
    """Raised when a rate never changes sign over the search bracket."""


@dataclass(frozen=True)
class QberReport:
    """Per-basis error rates plus the protocol's basis-averaged value."""

    q_x: float
    q_y: float
    q_z: float
    q_protocol: float


@dataclass(frozen=True)
class RfiSecurityParams:
    """Check parameter C and the derived eavesdropper-information bound."""

    c: float
    u: float
    v: float
    i_eve: float


@dataclass(frozen=True)
class KeyRateReport:
    """Raw key rate (may be negative) with its protocol and channel inputs."""

    rate: float
    protocol: ProtocolKind
    inputs: FrameParams

    @property
    def rate_clamped(self) -> float:
        """Rate floored at zero, the view used for plotting."""
        return max(self.rate, 0.0)


def qber_basis(axis: BasisAxis, params: FrameParams) -> float:
    """Error rate in one basis: (1 - averaged correlator)/2.

    Z gives p/2 for any frame; X and Y give
    1/2 - (1 - 2*Q_Z) cos(theta) sinc(delta) / 2.
    """
    corr = averaged_correlation(axis, axis, params,
                                eigenstate(axis, Eigenvalue.PLUS))
    return 0.5 * (1.0 - corr)


def qber_protocol(protocol: ProtocolKind, params: FrameParams) -> QberReport:
    """Equal-weight average of the per-basis error rates over the basis set."""
    if protocol is ProtocolKind.RFI:
        raise ValueError("the frame-independent protocol has no basis-averaged "
                         "error rate; use qber_basis(Z) and c_parameter")
    q = {axis: qber_basis(axis, params) for axis in
         (BasisAxis.X, BasisAxis.Y, BasisAxis.Z)}
    bases = _PROTOCOL_BASES[protocol]
    avg = sum(q[a] for a in bases) / len(bases)
    return QberReport(q_x=q[BasisAxis.X], q_y=q[BasisAxis.Y],
                      q_z=q[BasisAxis.Z], q_protocol=avg)


def binary_entropy(x: float) -> float:
    """Shannon entropy -x log2 x - (1-x) log2 (1-x), 0 at both endpoints."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def c_parameter(params: FrameParams) -> float:
    """Frame-independent check parameter 2 (1-2 Q_Z)^2 sinc(delta)^2.

    Independent of theta; maximal (= 2 at p = 0) for a non-fluctuating frame.
    """
    contrast = 1.0 - params.p
    return 2.0 * contrast * contrast * sinc(params.delta) ** 2


def eve_information(q_z: float, c: float) -> RfiSecurityParams:
    """Eavesdropper-information bound from the key-basis QBER and C.

    u = min(sqrt(c/2)/(1 - q_z), 1); v = sqrt(max(0, c/2 - (1-q_z)^2 u^2))/q_z,
    capped at 1 so the entropy argument stays in [0, 1] (the cap never binds
    for channel-model inputs, which satisfy c <= 2 (1-2 q_z)^2 and hence have
    u < 1 and v = 0 whenever q_z > 0); i_eve = (1-q_z) H[(1+u)/2]
    + q_z H[(1+v)/2], with the q_z term defined as 0 in the q_z -> 0 limit.
    """
    if not 0.0 <= q_z < 0.5:
        raise ValueError(f"key-basis QBER must be in [0, 1/2), got {q_z}")
    if not 0.0 <= c <= 2.0:
        raise ValueError(f"check parameter must be in [0, 2], got {c}")
    u = min(np.sqrt(c / 2.0) / (1.0 - q_z), 1.0)
    if q_z == 0.0:
        v = 0.0
        tail = 0.0
    else:
        # max(0, .) absorbs floating-point residue; analytically v = 0 when u < 1.
        v = min(np.sqrt(max(0.0, c / 2.0 - (1.0 - q_z) ** 2 * u * u)) / q_z, 1.0)
        tail = q_z * binary_entropy(0.5 * (1.0 + v))
    i_eve = (1.0 - q_z) * binary_entropy(0.5 * (1.0 + u)) + tail
    return RfiSecurityParams(c=float(c), u=float(u), v=float(v), i_eve=float(i_eve))


def _six_state_rate(q: float) -> float:
    if q == 0.0:
        return 1.0
    inner = (1.0 - 1.5 * q) / (1.0 - q)
    return 1.0 - binary_entropy(q) - q - (1.0 - q) * binary_entropy(inner)


def key_rate(protocol: ProtocolKind, params: FrameParams) -> KeyRateReport:
    """Asymptotic secret-key rate per sifted bit (raw, not floored at zero).

    BB84 variants: 1 - 2 H[Q] with the protocol's own averaged QBER.
    Six-state: 1 - H[Q] - Q - (1-Q) H[(1 - 3Q/2)/(1-Q)].
    Frame-independent: 1 - H[Q_Z] - i_eve(Q_Z, C), which depends on theta
    not at all.
    """
    if protocol is ProtocolKind.RFI:
        q_z = qber_basis(BasisAxis.Z, params)
        sec = eve_information(q_z, c_parameter(params))
        rate = 1.0 - binary_entropy(q_z) - sec.i_eve
    elif protocol is ProtocolKind.SIX_STATE:
        rate = _six_state_rate(qber_protocol(protocol, params).q_protocol)
    else:
        rate = 1.0 - 2.0 * binary_entropy(qber_protocol(protocol, params).q_protocol)
    return KeyRateReport(rate=float(rate), protocol=protocol, inputs=params)


# Search brackets: rotation sweeps cover (0, pi/2]; fluctuation sweeps cover
# (0, 2] radians, past every zero crossing these formulas produce.
_BRACKET_END = {
    SweepVariable.ROTATION: np.pi / 2.0,
    SweepVariable.FLUCTUATION: 2.0,
}

THRESHOLD_TOLERANCE_RAD = 1e-6


def find_zero_threshold(protocol: ProtocolKind, p: float,
                        sweep: SweepVariable) -> float:
    """Smallest sweep angle where the raw key rate crosses zero.

    Sweeps theta with delta = 0 (ROTATION) or delta with theta = 0
    (FLUCTUATION); the other variable is held at zero. Located by bracketing
    bisection to 1e-6 rad; the rate is strictly decreasing on the bracket.
    Raises NoZeroCrossingError when the rate never changes sign.
    """
    if sweep is SweepVariable.GRID2D:
        raise ValueError("threshold search needs a single swept variable")

    def rate_at(angle: float) -> float:
        if sweep is SweepVariable.ROTATION:
            frame = FrameParams(p, angle, 0.0)
        else:
            frame = FrameParams(p, 0.0, angle)
        return key_rate(protocol, frame).rate

    lo, hi = 0.0, _BRACKET_END[sweep]
    if rate_at(lo) <= 0.0:
        raise ValueError(f"rate is not positive at zero sweep angle (p={p})")
    if rate_at(hi) > 0.0:
        raise NoZeroCrossingError(
            f"{protocol.value} rate never crosses zero on (0, {hi:g}] "
            f"under a {sweep.value} sweep at p={p}")
    while hi - lo > THRESHOLD_TOLERANCE_RAD:
        mid = 0.5 * (lo + hi)
        if rate_at(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
