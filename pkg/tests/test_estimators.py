"""Tests for the channel and frequency-offset estimators."""

import dataclasses

import numpy as np
import pytest

from risofdm.analysis import nmse_freq, nmse_time
from risofdm.channel_model import exponential_pdp, sample_cir
from risofdm.errors import EstimationError, ParameterError, PilotError
from risofdm.estimators import (
    baseline_cfr_block,
    baseline_cfr_full,
    cfo_compensate,
    cfo_estimate,
    cir_estimate_block,
    cir_estimate_full,
    joint_estimate,
    uniform_comb,
)
from risofdm.frame import FrameGeometry, build_baseline_pilots, build_periodic_pilots
from risofdm.link import phase_ramp, transmit_frame
from risofdm.numerics import circulant, zadoff_chu
from risofdm.ris_pattern import dft_pattern


def make_setup(n=256, l=32, l_cp=34, m=3, n_z=4, seed=70, style="periodic"):
    geom = FrameGeometry(n=n, l=l, l_cp=l_cp, m=m, n_z=n_z)
    rng = np.random.default_rng(seed)
    if style == "periodic":
        frame = build_periodic_pilots(geom, zadoff_chu(l), rng)
    else:
        frame = build_baseline_pilots(geom, rng)
    channels = sample_cir(exponential_pdp(l, 1 / 3), m, n, rng)
    pattern = dft_pattern(m)
    return geom, frame, channels, pattern, rng


def dense_unitary_dft(n):
    p, q = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(-2j * np.pi * p * q / n) / np.sqrt(n)


class TestBaselineBlock:
    def test_noiseless_recovers_aggregate_response(self):
        geom, frame, channels, pattern, rng = make_setup(style="baseline")
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.0, rng)
        for k in range(geom.n_blocks):
            h_phi = channels.h @ pattern.phi[:, k]
            estimate = baseline_cfr_block(rx.y[:, k], frame.s[:, k], geom.l)
            np.testing.assert_allclose(estimate, h_phi, atol=1e-10 * np.abs(h_phi).max())

    def test_zero_input_gives_zero(self):
        geom, frame, *_ = make_setup(style="baseline")
        out = baseline_cfr_block(np.zeros(geom.n, dtype=complex), frame.s[:, 0], geom.l)
        np.testing.assert_array_equal(out, np.zeros(geom.n))

    def test_matches_dense_matrix_chain_under_offset(self):
        # Oracle: the same estimator written with explicit DFT matrices
        # (divide by pilots, project on the first-L-taps subspace).
        geom, frame, channels, pattern, rng = make_setup(
            n=64, l=8, l_cp=10, m=2, n_z=2, style="baseline"
        )
        rx = transmit_frame(frame, channels, pattern, 0.01, 0.0, rng)
        f = dense_unitary_dft(64)
        f_l = f[:, :8]
        for k in range(geom.n_blocks):
            g_dense = f_l.conj().T @ (rx.y[:, k] / frame.s[:, k])
            oracle = f @ np.concatenate([g_dense, np.zeros(56)])
            estimate = baseline_cfr_block(rx.y[:, k], frame.s[:, k], geom.l)
            np.testing.assert_allclose(estimate, oracle, atol=1e-12 * np.abs(oracle).max())

    def test_truncation_removes_leakage_energy(self):
        # Under an offset, the estimate is the tap-truncated image of the
        # leakage-corrupted response, not that response itself; the
        # difference is the inter-carrier energy outside the first L taps.
        geom, frame, channels, pattern, rng = make_setup(
            n=64, l=8, l_cp=10, m=2, n_z=2, style="baseline"
        )
        rx = transmit_frame(frame, channels, pattern, 0.01, 0.0, rng)
        corrupted = rx.y[:, 0] / frame.s[:, 0]
        estimate = baseline_cfr_block(rx.y[:, 0], frame.s[:, 0], geom.l)
        gap = np.linalg.norm(estimate - corrupted) / np.linalg.norm(corrupted)
        assert 1e-4 < gap < 0.1

    def test_comb_matches_least_squares_oracle(self):
        geom, frame, channels, pattern, rng = make_setup(style="baseline")
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.1, rng)
        comb = uniform_comb(geom.n, 128)
        f = dense_unitary_dft(geom.n)
        a = f[comb, : geom.l]
        for k in range(2):
            target = rx.y[comb, k] / frame.s[comb, k]
            g_ls, *_ = np.linalg.lstsq(a, target, rcond=None)
            oracle = np.fft.fft(g_ls, n=geom.n) / np.sqrt(geom.n)
            estimate = baseline_cfr_block(rx.y[:, k], frame.s[:, k], geom.l, pilot_idx=comb)
            np.testing.assert_allclose(estimate, oracle, atol=1e-9 * np.abs(oracle).max())

    def test_zero_pilot_symbol_names_subcarrier(self):
        geom, frame, *_ = make_setup(style="baseline")
        s = frame.s[:, 0].copy()
        s[17] = 0.0
        with pytest.raises(PilotError, match="17"):
            baseline_cfr_block(np.ones(geom.n, dtype=complex), s, geom.l)

    def test_comb_must_resolve_taps(self):
        with pytest.raises(ParameterError):
            baseline_cfr_block(
                np.ones(64, dtype=complex),
                np.ones(64, dtype=complex),
                16,
                pilot_idx=uniform_comb(64, 8),
            )


class TestBaselineFull:
    def test_noiseless_exact(self):
        geom, frame, channels, pattern, rng = make_setup(style="baseline")
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.0, rng)
        estimate = baseline_cfr_full(rx, frame, pattern)
        assert nmse_freq(channels.h, estimate.h_hat) <= 1e-18

    def test_noise_floor_matches_theory(self):
        # At zero offset the NMSE is sigma2 L / (N (M+1)).
        geom, frame, channels, pattern, _ = make_setup(
            n=64, l=8, l_cp=10, m=4, n_z=2, style="baseline"
        )
        sigma2 = 0.1
        num = den = 0.0
        for trial in range(2000):
            rng = np.random.default_rng(1000 + trial)
            frame = build_baseline_pilots(geom, rng)
            channels = sample_cir(exponential_pdp(8, 1 / 3), 4, 64, rng)
            rx = transmit_frame(frame, channels, pattern, 0.0, sigma2, rng)
            estimate = baseline_cfr_full(rx, frame, pattern)
            num += np.linalg.norm(estimate.h_hat - channels.h) ** 2
            den += np.linalg.norm(channels.h) ** 2
        assert num / den == pytest.approx(sigma2 * 8 / (64 * 5), rel=0.05)

    def test_requires_baseline_frame(self):
        geom, frame, channels, pattern, rng = make_setup(style="periodic")
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.0, rng)
        with pytest.raises(ParameterError):
            baseline_cfr_full(rx, frame, pattern)


class TestCfoEstimate:
    @pytest.mark.parametrize("eps", [0.0, 0.005, -0.37, 0.5])
    def test_noiseless_is_exact(self, eps):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        estimate = cfo_estimate(rx)
        assert abs(estimate.epsilon_hat - eps) <= 1e-9

    def test_sample_count(self):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, 0.1, 0.0, rng)
        expected = ((geom.n_z - 2) * geom.l + 1) * geom.n_blocks
        assert cfo_estimate(rx).sample_count == expected

    def test_estimate_range_bound(self):
        geom, frame, channels, pattern, rng = make_setup()
        for trial in range(20):
            rx = transmit_frame(frame, channels, pattern, 0.49, 10.0, rng)
            estimate = cfo_estimate(rx)
            assert abs(estimate.epsilon_hat) <= geom.n / (2 * geom.l) + 1e-12

    def test_noiseless_correlation_is_real_positive(self):
        geom, frame, channels, pattern, rng = make_setup()
        eps = 0.23
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        estimate = cfo_estimate(rx)
        rotated = estimate.correlation * np.exp(2j * np.pi * eps * geom.l / geom.n)
        assert abs(np.angle(rotated)) <= 1e-9
        assert rotated.real > 0

    def test_zero_correlation_raises(self):
        geom, frame, channels, pattern, rng = make_setup()
        zero = transmit_frame(
            frame,
            dataclasses.replace(channels, g=np.zeros_like(channels.g), h=np.zeros_like(channels.h)),
            pattern,
            0.0,
            0.0,
            rng,
        )
        with pytest.raises(EstimationError):
            cfo_estimate(zero)


class TestCfoCompensate:
    def test_zero_offset_is_identity(self):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, 0.2, 0.1, rng)
        np.testing.assert_array_equal(cfo_compensate(rx, 0.0).r, rx.r)

    def test_exact_compensation_removes_ramp(self):
        geom, frame, channels, pattern, rng = make_setup()
        eps = 0.31
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        clean = cfo_compensate(rx, eps)
        oracle = rx.r / phase_ramp(geom, eps)
        np.testing.assert_allclose(clean.r, oracle, atol=1e-12)

    def test_phase_additivity(self):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, 0.11, 0.2, rng)
        twice = cfo_compensate(cfo_compensate(rx, 0.07), -0.18)
        once = cfo_compensate(rx, 0.07 - 0.18)
        np.testing.assert_allclose(twice.r, once.r, atol=1e-12)


class TestCirEstimate:
    def test_noiseless_block_recovers_aggregate_cir(self):
        geom, frame, channels, pattern, rng = make_setup()
        eps = 0.29
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        clean = cfo_compensate(rx, eps)
        for k in range(geom.n_blocks):
            g_phi = channels.g @ pattern.phi[:, k]
            estimate = cir_estimate_block(clean.r[:, k], frame.z, geom)
            np.testing.assert_allclose(estimate, g_phi, atol=1e-10 * np.abs(g_phi).max())

    def test_zero_input_gives_zero(self):
        geom = FrameGeometry(n=16, l=4, l_cp=4, m=0, n_z=3)
        out = cir_estimate_block(np.zeros(16, dtype=complex), zadoff_chu(4), geom)
        np.testing.assert_allclose(out, np.zeros(4), atol=1e-15)

    def test_matches_dense_stacked_least_squares(self):
        # Averaging subsequences then solving one circulant system is the
        # least-squares solution of the stacked per-subsequence systems.
        geom = FrameGeometry(n=12, l=4, l_cp=4, m=0, n_z=3)
        rng = np.random.default_rng(71)
        z = zadoff_chu(4)
        r = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        stacked = np.vstack([circulant(z), circulant(z)])
        target = np.concatenate([r[4:8], r[8:12]])
        oracle, *_ = np.linalg.lstsq(stacked, target, rcond=None)
        np.testing.assert_allclose(cir_estimate_block(r, z, geom), oracle, atol=1e-9)

    def test_full_noiseless_with_known_offset(self):
        geom, frame, channels, pattern, rng = make_setup()
        eps = -0.17
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        estimate = cir_estimate_full(cfo_compensate(rx, eps), frame, pattern)
        assert nmse_time(channels.g, estimate.g_hat) <= 1e-18
        assert nmse_freq(channels.h, estimate.h_hat) <= 1e-18

    def test_requires_periodic_frame(self):
        geom, frame, channels, pattern, rng = make_setup(style="baseline")
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.0, rng)
        with pytest.raises(ParameterError):
            cir_estimate_full(rx, frame, pattern)


class TestJointEstimate:
    def test_noiseless_end_to_end(self):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, 0.41, 0.0, rng)
        joint = joint_estimate(rx, frame, pattern)
        assert abs(joint.cfo.epsilon_hat - 0.41) <= 1e-9
        assert nmse_time(channels.g, joint.cir.g_hat) <= 1e-12

    def test_deterministic(self):
        geom, frame, channels, pattern, _ = make_setup()
        rng = np.random.default_rng(72)
        rx = transmit_frame(frame, channels, pattern, 0.13, 0.5, rng)
        a = joint_estimate(rx, frame, pattern)
        b = joint_estimate(rx, frame, pattern)
        assert a.cfo.epsilon_hat == b.cfo.epsilon_hat
        np.testing.assert_array_equal(a.cir.g_hat, b.cir.g_hat)

    def test_consumes_only_training_samples_and_no_ground_truth(self):
        # Poison everything the estimators must not touch: the payload
        # region of r, the whole frequency-domain view, and the
        # ground-truth metadata.  The pipeline must still be exact.
        geom, frame, channels, pattern, rng = make_setup()
        eps = 0.27
        rx = transmit_frame(frame, channels, pattern, eps, 0.0, rng)
        poisoned_r = rx.r.copy()
        poisoned_r[geom.n_z * geom.l :, :] = np.nan
        poisoned = dataclasses.replace(
            rx,
            r=poisoned_r,
            y=np.full_like(rx.y, np.nan),
            epsilon_true=np.nan,
            sigma2=np.nan,
        )
        joint = joint_estimate(poisoned, frame, pattern)
        assert abs(joint.cfo.epsilon_hat - eps) <= 1e-9
        assert nmse_time(channels.g, joint.cir.g_hat) <= 1e-12

    def test_reports_operation_counts(self):
        geom, frame, channels, pattern, rng = make_setup()
        rx = transmit_frame(frame, channels, pattern, 0.0, 0.1, rng)
        counts = joint_estimate(rx, frame, pattern).mult_counts
        assert counts.cfo_correlation == ((geom.n_z - 2) * geom.l + 1) * geom.n_blocks
        assert counts.total == counts.cfo_stage + counts.cir_stage
        assert counts.total > 0


def test_uniform_comb_validation():
    np.testing.assert_array_equal(uniform_comb(8, 4), [0, 2, 4, 6])
    with pytest.raises(ParameterError):
        uniform_comb(8, 3)
    with pytest.raises(ParameterError):
        uniform_comb(8, 9)
