"""Transmission channel model.

Isotropic depolarizing noise, a fixed rotation of the receiver's X-Y
measurement plane, and a uniform fluctuation of that rotation, in both
closed-form (averaged) and per-pulse sampling form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polarization import (
    BasisAxis,
    ComplexMatrix2,
    PolarizationState,
    bloch_vector,
    pauli,
)


@dataclass(frozen=True)
class FrameParams:
    """Channel parameters: depolarizing probability and frame misalignment.

    p is the depolarizing probability, theta the mean rotation of the
    receiver's X-Y observable plane, delta the half-width of the uniform
    fluctuation interval [theta - delta, theta + delta].
    """

    p: float
    theta: float
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"depolarizing probability must be in [0, 1], got {self.p}")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if not (np.isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"fluctuation half-width must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class FrameSample:
    """One realized instantaneous rotation angle."""

    phi: float

    def __post_init__(self):
        if not np.isfinite(self.phi):
            raise ValueError("phi must be finite")


def sinc(delta: float) -> float:
    """sin(delta)/delta with the removable singularity filled: sinc(0) = 1."""
    if delta == 0.0:
        return 1.0
    return float(np.sin(delta) / delta)


def depolarize(state: PolarizationState, p: float) -> PolarizationState:
    """Isotropic noise map rho -> (1-p) rho + p I/2.

    Contracts every Bloch component by exactly (1-p).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must be in [0, 1], got {p}")
    out = (1.0 - p) * state.matrix + p * 0.5 * np.eye(2)
    return PolarizationState(ComplexMatrix2(out))


def rotated_axis_decomposition(axis: BasisAxis, phi: float) -> dict[BasisAxis, float]:
    """Receiver's axis expressed in the sender's frame at rotation phi.

    X_B = cos(phi) X + sin(phi) Y; Y_B = cos(phi) Y - sin(phi) X; Z_B = Z.
    Returns coefficients for all three axes (zeros included).
    """
    c, s = float(np.cos(phi)), float(np.sin(phi))
    if axis is BasisAxis.X:
        return {BasisAxis.X: c, BasisAxis.Y: s, BasisAxis.Z: 0.0}
    if axis is BasisAxis.Y:
        return {BasisAxis.X: -s, BasisAxis.Y: c, BasisAxis.Z: 0.0}
    return {BasisAxis.X: 0.0, BasisAxis.Y: 0.0, BasisAxis.Z: 1.0}


def _averaged_decomposition(axis: BasisAxis, params: FrameParams) -> dict[BasisAxis, float]:
    # Uniform average over phi in [theta - delta, theta + delta]:
    # <cos phi> = cos(theta) sinc(delta), <sin phi> = sin(theta) sinc(delta).
    att = sinc(params.delta)
    c = float(np.cos(params.theta)) * att
    s = float(np.sin(params.theta)) * att
    if axis is BasisAxis.X:
        return {BasisAxis.X: c, BasisAxis.Y: s, BasisAxis.Z: 0.0}
    if axis is BasisAxis.Y:
        return {BasisAxis.X: -s, BasisAxis.Y: c, BasisAxis.Z: 0.0}
    return {BasisAxis.X: 0.0, BasisAxis.Y: 0.0, BasisAxis.Z: 1.0}


def averaged_correlation(obs_a: BasisAxis, obs_b: BasisAxis,
                         params: FrameParams, state_a: PolarizationState) -> float:
    """Fluctuation-averaged correlator between sender and receiver observables.

    The sender measures obs_a on state_a; the channel depolarizes the
    transmitted copy with probability p and rotates the receiver's obs_b per
    the frame model; the instantaneous product-state correlator is averaged
    uniformly over phi in [theta - delta, theta + delta], in closed form.

    For obs_a = obs_b in {X, Y} on a +1 eigenstate this is
    (1-p) cos(theta) sinc(delta); for Z it is (1-p), independent of the frame.
    """
    va = float(np.trace(pauli(obs_a).entries @ state_a.matrix).real)
    rho_b = depolarize(state_a, params.p)
    b = bloch_vector(rho_b)
    coeffs = _averaged_decomposition(obs_b, params)
    vb = (coeffs[BasisAxis.X] * b[0]
          + coeffs[BasisAxis.Y] * b[1]
          + coeffs[BasisAxis.Z] * b[2])
    return float(va * vb)


def sample_frame(params: FrameParams, rng: np.random.Generator) -> FrameSample:
    """Draw one instantaneous rotation uniformly from [theta-delta, theta+delta]."""
    if params.delta == 0.0:
        return FrameSample(params.theta)
    phi = rng.uniform(params.theta - params.delta, params.theta + params.delta)
    return FrameSample(float(phi))
