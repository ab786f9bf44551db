"""Polarization qubit primitives.

Density matrices, the three Pauli observables under the fixed convention
X = diagonal/antidiagonal, Y = right/left circular, Z = horizontal/vertical,
waveplate Jones matrices, and expectation values on product states.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

# Absolute tolerance for invariant checks on constructed objects.
ATOL_OBJECT = 1e-9
# Absolute tolerance for algebraic identities on exact inputs.
ATOL_EXACT = 1e-12


class BasisAxis(Enum):
    """Measurement axis label; X pairs D/A, Y pairs R/L, Z pairs H/V."""

    X = "X"
    Y = "Y"
    Z = "Z"


class Eigenvalue(IntEnum):
    """Outcome sign; the first named polarization of each pair (H, D, R) is +1."""

    PLUS = 1
    MINUS = -1


@dataclass(frozen=True, eq=False)
class ComplexMatrix2:
    """Immutable 2x2 complex matrix with finite entries."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
            raise ValueError("matrix entries must be finite")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def close_to(self, other: "ComplexMatrix2", tol: float = ATOL_OBJECT) -> bool:
        return bool(np.allclose(self.entries, other.entries, rtol=0.0, atol=tol))

    def dagger(self) -> "ComplexMatrix2":
        return ComplexMatrix2(self.entries.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def __matmul__(self, other: "ComplexMatrix2") -> "ComplexMatrix2":
        return ComplexMatrix2(self.entries @ other.entries)


IDENTITY = ComplexMatrix2(np.eye(2))


@dataclass(frozen=True, eq=False)
class PolarizationState:
    """Single-qubit density matrix: Hermitian, unit trace, positive semidefinite."""

    density: ComplexMatrix2

    def __post_init__(self):
        m = self.density.entries
        if not np.allclose(m, m.conj().T, rtol=0.0, atol=ATOL_OBJECT):
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m) - 1.0) > ATOL_OBJECT:
            raise ValueError("density matrix must have unit trace")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -ATOL_OBJECT:
            raise ValueError(f"density matrix must be positive semidefinite, "
                             f"smallest eigenvalue {eigs.min():.3e}")

    @property
    def matrix(self) -> np.ndarray:
        return self.density.entries


_PAULI = {
    BasisAxis.X: np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    BasisAxis.Y: np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    BasisAxis.Z: np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}

# Unit kets for the six polarizations, keyed by (axis, sign).
_KETS = {
    (BasisAxis.Z, Eigenvalue.PLUS): np.array([1.0, 0.0], dtype=np.complex128),
    (BasisAxis.Z, Eigenvalue.MINUS): np.array([0.0, 1.0], dtype=np.complex128),
    (BasisAxis.X, Eigenvalue.PLUS): np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0),
    (BasisAxis.X, Eigenvalue.MINUS): np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0),
    (BasisAxis.Y, Eigenvalue.PLUS): np.array([1.0, 1.0j], dtype=np.complex128) / np.sqrt(2.0),
    (BasisAxis.Y, Eigenvalue.MINUS): np.array([1.0, -1.0j], dtype=np.complex128) / np.sqrt(2.0),
}


def pauli(axis: BasisAxis) -> ComplexMatrix2:
    """Hermitian, traceless, involutory observable for the given axis."""
    return ComplexMatrix2(_PAULI[axis])


def eigenstate(axis: BasisAxis, sign: Eigenvalue) -> PolarizationState:
    """Pure state satisfying pauli(axis) rho = sign * rho."""
    ket = _KETS[(axis, sign)]
    return PolarizationState(ComplexMatrix2(np.outer(ket, ket.conj())))


def expectation(obs_a: BasisAxis, obs_b: BasisAxis,
                state_a: PolarizationState, state_b: PolarizationState) -> float:
    """Joint expectation Tr[W_A rho_A] * Tr[W_B rho_B] on a product state.

    The tensor-product trace factorizes for product states, so only the two
    single-qubit traces are evaluated. Result lies in [-1, 1].
    """
    va = np.trace(_PAULI[obs_a] @ state_a.matrix).real
    vb = np.trace(_PAULI[obs_b] @ state_b.matrix).real
    return float(va * vb)


def bloch_vector(state: PolarizationState) -> np.ndarray:
    """Bloch components (Tr[X rho], Tr[Y rho], Tr[Z rho]) as a real 3-vector."""
    m = state.matrix
    return np.array([np.trace(_PAULI[ax] @ m).real
                     for ax in (BasisAxis.X, BasisAxis.Y, BasisAxis.Z)])


def _retarder(fast_axis_angle: float, retardance: float) -> ComplexMatrix2:
    # Fast axis transmits with phase 1, slow axis is retarded by e^{i*retardance}.
    c = np.cos(fast_axis_angle)
    s = np.sin(fast_axis_angle)
    g = np.exp(1.0j * retardance)
    return ComplexMatrix2(np.array([
        [c * c + g * s * s, (1.0 - g) * c * s],
        [(1.0 - g) * c * s, s * s + g * c * c],
    ]))


def waveplate_quarter(fast_axis_angle: float) -> ComplexMatrix2:
    """Jones matrix of a quarter-wave plate with the given fast-axis angle."""
    return _retarder(fast_axis_angle, np.pi / 2.0)


def waveplate_half(fast_axis_angle: float) -> ComplexMatrix2:
    """Jones matrix of a half-wave plate with the given fast-axis angle."""
    return _retarder(fast_axis_angle, np.pi)


def rotation_plate_composite(theta_h: float) -> ComplexMatrix2:
    """Quarter/half/quarter plate stack: QWP(pi/4) . HWP(theta_h) . QWP(pi/4).

    Equals diag(e^{-i 2 theta_h}, -e^{i 2 theta_h}) up to a global phase.
    Conjugating the X observable with it rotates the X-Y observable plane by
    4*theta_h + pi (the composite at theta_h = 0 is the Z observable up to
    phase, not the identity).
    """
    q = waveplate_quarter(np.pi / 4.0)
    return q @ waveplate_half(theta_h) @ q


def frame_rotation_unitary(phi: float) -> ComplexMatrix2:
    """Unitary whose conjugation rotates the X-Y observable plane by phi.

    Returns diag(e^{-i phi/2}, e^{+i phi/2}): conjugation maps
    X -> cos(phi) X + sin(phi) Y, Y -> cos(phi) Y - sin(phi) X, Z -> Z.
    Equals rotation_plate_composite((phi - pi) / 4) up to a global phase.
    """
    return ComplexMatrix2(np.array([
        [np.exp(-0.5j * phi), 0.0],
        [0.0, np.exp(0.5j * phi)],
    ]))


def conjugate_observable(unitary: ComplexMatrix2, axis: BasisAxis) -> ComplexMatrix2:
    """Heisenberg-picture observable U pauli(axis) U^dagger.

    Raises ValueError if the matrix is not unitary within tolerance.
    """
    u = unitary.entries
    defect = np.abs(u @ u.conj().T - np.eye(2)).max()
    if defect > ATOL_OBJECT:
        raise ValueError(f"matrix is not unitary, defect {defect:.3e}")
    return ComplexMatrix2(u @ _PAULI[axis] @ u.conj().T)


def equal_up_to_phase(a: ComplexMatrix2, b: ComplexMatrix2,
                      tol: float = ATOL_OBJECT) -> bool:
    """True when a = e^{i alpha} b for some real alpha, entrywise within tol."""
    am, bm = a.entries, b.entries
    k = np.unravel_index(np.abs(bm).argmax(), bm.shape)
    if np.abs(bm[k]) <= tol:
        return bool(np.abs(am).max() <= tol)
    phase = am[k] / bm[k]
    norm = np.abs(phase)
    if abs(norm - 1.0) > tol:
        return False
    return bool(np.allclose(am, (phase / norm) * bm, rtol=0.0, atol=tol))
