"""Tests for the channel model: depolarization, frame rotation, averaging."""

import numpy as np
import pytest

from rfiqkd.channel import (
    FrameParams,
    FrameSample,
    averaged_correlation,
    depolarize,
    rotated_axis_decomposition,
    sample_frame,
    sinc,
)
from rfiqkd.polarization import (
    BasisAxis,
    ComplexMatrix2,
    Eigenvalue,
    PolarizationState,
    bloch_vector,
    eigenstate,
    expectation,
    pauli,
)

AXES = (BasisAxis.X, BasisAxis.Y, BasisAxis.Z)


def random_state(rng):
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, 1.0) / np.linalg.norm(v)
    m = 0.5 * (np.eye(2) + v[0] * pauli(BasisAxis.X).entries
               + v[1] * pauli(BasisAxis.Y).entries
               + v[2] * pauli(BasisAxis.Z).entries)
    return PolarizationState(ComplexMatrix2(m))


class TestDepolarize:
    def test_zero_probability_is_identity(self):
        rho = eigenstate(BasisAxis.Y, Eigenvalue.PLUS)
        out = depolarize(rho, 0.0)
        assert np.allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_full_depolarization_gives_maximally_mixed(self):
        for axis in AXES:
            out = depolarize(eigenstate(axis, Eigenvalue.MINUS), 1.0)
            assert np.allclose(out.matrix, 0.5 * np.eye(2), atol=1e-15)

    def test_horizontal_at_six_percent(self):
        out = depolarize(eigenstate(BasisAxis.Z, Eigenvalue.PLUS), 0.06)
        assert np.allclose(out.matrix, np.diag([0.97, 0.03]), atol=1e-15)

    def test_diagonal_correlation_at_six_percent(self):
        d = eigenstate(BasisAxis.X, Eigenvalue.PLUS)
        val = expectation(BasisAxis.X, BasisAxis.X, d, depolarize(d, 0.06))
        assert val == pytest.approx(0.94, abs=1e-12)

    def test_rejects_out_of_range_probability(self):
        rho = eigenstate(BasisAxis.Z, Eigenvalue.PLUS)
        for bad in (-0.1, 1.1):
            with pytest.raises(ValueError, match="probability"):
                depolarize(rho, bad)

    def test_preserves_trace_and_positivity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            rho = random_state(rng)
            p = rng.uniform()
            out = depolarize(rho, p)
            assert np.trace(out.matrix).real == pytest.approx(1.0, abs=1e-12)
            assert np.linalg.eigvalsh(out.matrix).min() >= -1e-12

    def test_contracts_bloch_vector_by_one_minus_p(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            rho = random_state(rng)
            p = rng.uniform()
            before = bloch_vector(rho)
            after = bloch_vector(depolarize(rho, p))
            assert np.allclose(after, (1.0 - p) * before, atol=1e-12)


class TestRotatedAxisDecomposition:
    def test_z_axis_untouched(self):
        for phi in (-1.0, 0.0, 0.7, np.pi):
            coeffs = rotated_axis_decomposition(BasisAxis.Z, phi)
            assert coeffs == {BasisAxis.X: 0.0, BasisAxis.Y: 0.0, BasisAxis.Z: 1.0}

    def test_x_at_zero_rotation(self):
        coeffs = rotated_axis_decomposition(BasisAxis.X, 0.0)
        assert coeffs[BasisAxis.X] == pytest.approx(1.0)
        assert coeffs[BasisAxis.Y] == pytest.approx(0.0, abs=1e-15)

    def test_x_at_quarter_turn_becomes_y(self):
        coeffs = rotated_axis_decomposition(BasisAxis.X, np.pi / 2)
        assert coeffs[BasisAxis.X] == pytest.approx(0.0, abs=1e-12)
        assert coeffs[BasisAxis.Y] == pytest.approx(1.0)

    def test_y_rotates_against_x(self):
        phi = 0.31
        coeffs = rotated_axis_decomposition(BasisAxis.Y, phi)
        assert coeffs[BasisAxis.X] == pytest.approx(-np.sin(phi))
        assert coeffs[BasisAxis.Y] == pytest.approx(np.cos(phi))


class TestAveragedCorrelation:
    def test_zz_ignores_frame(self):
        h = eigenstate(BasisAxis.Z, Eigenvalue.PLUS)
        rng = np.random.default_rng(5)
        values = []
        for _ in range(100):
            params = FrameParams(0.06, rng.uniform(-np.pi, np.pi), rng.uniform(0.0, np.pi))
            values.append(averaged_correlation(BasisAxis.Z, BasisAxis.Z, params, h))
        assert np.ptp(values) <= 1e-12
        assert values[0] == pytest.approx(0.94, abs=1e-12)

    def test_aligned_noiseless_is_unity(self):
        d = eigenstate(BasisAxis.X, Eigenvalue.PLUS)
        val = averaged_correlation(BasisAxis.X, BasisAxis.X, FrameParams(0.0, 0.0, 0.0), d)
        assert val == pytest.approx(1.0, abs=1e-12)

    def test_pure_rotation_gives_cosine(self):
        d = eigenstate(BasisAxis.X, Eigenvalue.PLUS)
        val = averaged_correlation(BasisAxis.X, BasisAxis.X,
                                   FrameParams(0.0, np.pi / 3, 0.0), d)
        assert val == pytest.approx(0.5, abs=1e-12)

    def test_sinc_continuity_at_zero_width(self):
        d = eigenstate(BasisAxis.X, Eigenvalue.PLUS)
        at_zero = averaged_correlation(BasisAxis.X, BasisAxis.X,
                                       FrameParams(0.02, 0.4, 0.0), d)
        near_zero = averaged_correlation(BasisAxis.X, BasisAxis.X,
                                         FrameParams(0.02, 0.4, 1e-9), d)
        assert abs(near_zero - at_zero) <= 1e-9

    def test_cross_terms_carry_sine(self):
        r = eigenstate(BasisAxis.Y, Eigenvalue.PLUS)
        d = eigenstate(BasisAxis.X, Eigenvalue.PLUS)
        theta, delta, p = 0.4, 0.25, 0.1
        att = (1.0 - p) * np.sin(delta) / delta
        params = FrameParams(p, theta, delta)
        assert averaged_correlation(BasisAxis.X, BasisAxis.Y, params, d) == \
            pytest.approx(-np.sin(theta) * att, abs=1e-12)
        assert averaged_correlation(BasisAxis.Y, BasisAxis.X, params, r) == \
            pytest.approx(np.sin(theta) * att, abs=1e-12)

    def test_matches_midpoint_quadrature(self):
        # Independent route: average the instantaneous product-state
        # correlator over 4096 midpoint panels and compare to the closed form.
        rng = np.random.default_rng(6)
        panels = 4096
        for _ in range(50):
            obs_a, obs_b = rng.choice(AXES, size=2)
            params = FrameParams(rng.uniform(0.0, 1.0),
                                 rng.uniform(-np.pi, np.pi),
                                 rng.uniform(0.01, np.pi))
            state_a = random_state(rng)
            rho_b = depolarize(state_a, params.p).matrix
            va = np.trace(pauli(obs_a).entries @ state_a.matrix).real

            lo = params.theta - params.delta
            width = 2.0 * params.delta
            phis = lo + (np.arange(panels) + 0.5) * (width / panels)
            half = np.exp(-0.5j * phis)
            us = np.zeros((panels, 2, 2), dtype=complex)
            us[:, 0, 0] = half
            us[:, 1, 1] = half.conj()
            rotated = us @ pauli(obs_b).entries @ us.conj().transpose(0, 2, 1)
            integrand = va * np.einsum("kij,ji->k", rotated, rho_b).real
            assert averaged_correlation(obs_a, obs_b, params, state_a) == \
                pytest.approx(integrand.mean(), abs=1e-6)


class TestSampleFrame:
    def test_degenerate_interval_returns_theta(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert sample_frame(FrameParams(0.0, 0.3, 0.0), rng).phi == 0.3

    def test_support_bound(self):
        rng = np.random.default_rng(1)
        params = FrameParams(0.0, 0.0, 0.2)
        samples = np.array([sample_frame(params, rng).phi for _ in range(5000)])
        assert samples.min() >= -0.2 and samples.max() <= 0.2

    def test_empirical_mean(self):
        rng = np.random.default_rng(2)
        params = FrameParams(0.0, 0.0, 0.2)
        n = 20000
        mean = np.mean([sample_frame(params, rng).phi for _ in range(n)])
        # 3 sigma of the mean of n uniform draws with sigma = delta/sqrt(3).
        assert abs(mean) <= 3.0 * (0.2 / np.sqrt(3.0)) / np.sqrt(n)


class TestValidation:
    def test_frame_params_rejects_bad_values(self):
        with pytest.raises(ValueError):
            FrameParams(-0.01, 0.0, 0.0)
        with pytest.raises(ValueError):
            FrameParams(1.01, 0.0, 0.0)
        with pytest.raises(ValueError):
            FrameParams(0.0, 0.0, -0.1)
        with pytest.raises(ValueError):
            FrameParams(0.0, np.nan, 0.0)

    def test_frame_sample_rejects_non_finite(self):
        with pytest.raises(ValueError):
            FrameSample(np.inf)

    def test_sinc_branch(self):
        assert sinc(0.0) == 1.0
        assert sinc(np.pi / 2) == pytest.approx(2.0 / np.pi)
