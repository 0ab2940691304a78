"""Channel and frequency-offset estimators.

Baseline (frequency domain): per block, divide out the pilot symbols,
truncate the impulse response to its first L taps, and transform back;
stack all blocks and unmix with the reflection-pattern inverse.  An
optional uniform comb restricts the fit to N_p equally spaced subcarriers.

Proposed (time domain): the lag-L correlation over the periodic training
region yields the frequency offset at no extra pilot cost; after phase
compensation, the repeated training subsequences are averaged (discarding
the first copy, whose head is contaminated by the previous subsequence
through the circular wrap) and a single L x L circulant solve per block
recovers the aggregate impulse responses, unmixed the same way.

All estimators are pure functions of the received samples and the known
transmit side; none reads the ground-truth fields carried by
:class:`risofdm.link.ReceivedFrame` for metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .analysis import MultiplicationCounts, count_joint_multiplications
from .channel_model import cir_to_cfr
from .errors import DimensionError, EstimationError, ParameterError, PilotError
from .frame import BASELINE, PERIODIC, FrameGeometry, PilotFrame
from .link import ReceivedFrame, phase_ramp
from .numerics import circulant_solve, dft
from .ris_pattern import ReflectionPattern, inverse_pattern

__all__ = [
    "CfoEstimate",
    "CfrEstimate",
    "CirEstimate",
    "JointEstimate",
    "uniform_comb",
    "baseline_cfr_block",
    "baseline_cfr_full",
    "cfo_estimate",
    "cfo_compensate",
    "cir_estimate_block",
    "cir_estimate_full",
    "joint_estimate",
]


@dataclass(frozen=True)
class CfoEstimate:
    """Correlation-based frequency-offset estimate.

    ``correlation`` is the averaged lag-L correlation whose angle encodes
    the offset; its magnitude doubles as an SNR diagnostic.
    ``sample_count`` is the number of averaged correlation products.
    """

    epsilon_hat: float
    correlation: complex
    sample_count: int


@dataclass(frozen=True)
class CfrEstimate:
    """Frequency-domain channel estimate, one column per path."""

    h_hat: np.ndarray


@dataclass(frozen=True)
class CirEstimate:
    """Time-domain channel estimate, one column per path."""

    g_hat: np.ndarray
    n_subcarriers: int

    @cached_property
    def h_hat(self) -> np.ndarray:
        """Subcarrier-gain view of the estimate."""
        return cir_to_cfr(self.g_hat, self.n_subcarriers)


@dataclass(frozen=True)
class JointEstimate:
    """Output of the two-stage pipeline plus its operation counts."""

    cfo: CfoEstimate
    cir: CirEstimate
    mult_counts: MultiplicationCounts


def uniform_comb(n: int, n_p: int) -> np.ndarray:
    """Indices of a uniform comb of ``n_p`` pilot subcarriers out of ``n``."""
    if not 1 <= n_p <= n:
        raise ParameterError(f"n_p must lie in [1, {n}], got {n_p}")
    if n % n_p != 0:
        raise ParameterError(f"comb size {n_p} must divide n={n}")
    return np.arange(n_p) * (n // n_p)


def baseline_cfr_block(
    y_k: np.ndarray,
    s_k: np.ndarray,
    n_taps: int,
    pilot_idx: np.ndarray | None = None,
) -> np.ndarray:
    """Single-block frequency-domain estimate of the aggregate response.

    Divides the received subcarriers by the pilots, keeps the first
    ``n_taps`` time-domain taps of the result, and returns the N-point
    response of that truncated impulse response.  With ``pilot_idx`` the
    division is restricted to those subcarriers and the truncated taps are
    the least-squares fit to the comb (which must be uniform).
    """
    y_k = np.asarray(y_k, dtype=np.complex128)
    s_k = np.asarray(s_k, dtype=np.complex128)
    if y_k.shape != s_k.shape or y_k.ndim != 1:
        raise DimensionError(
            f"y and s must be equal-length vectors, got {y_k.shape} and {s_k.shape}"
        )
    n = y_k.shape[0]
    if not 1 <= n_taps <= n:
        raise ParameterError(f"n_taps must lie in [1, {n}], got {n_taps}")

    used = np.arange(n) if pilot_idx is None else np.asarray(pilot_idx)
    if n_taps > used.shape[0]:
        raise ParameterError(
            f"comb of {used.shape[0]} subcarriers cannot resolve {n_taps} taps"
        )

    dead = np.abs(s_k[used]) == 0.0
    if dead.any():
        bad = int(used[np.argmax(dead)])
        raise PilotError(f"pilot symbol on subcarrier {bad} is zero")

    quotient = np.zeros(n, dtype=np.complex128)
    quotient[used] = y_k[used] / s_k[used]
    # The inverse FFT of the comb-masked quotient is (N_p/N) times the
    # least-squares tap fit, hence the rescale.
    taps = np.fft.ifft(quotient)[:n_taps] * (n / used.shape[0])
    return np.fft.fft(taps, n=n)


def baseline_cfr_full(
    received: ReceivedFrame,
    frame: PilotFrame,
    pattern: ReflectionPattern,
    n_taps: int | None = None,
    pilot_idx: np.ndarray | None = None,
) -> CfrEstimate:
    """Frequency-domain estimate of all per-path responses.

    Stacks the per-block estimates and right-multiplies by the pattern
    inverse.  Only valid on baseline-style frames (periodic frames do not
    have invertible pilots on every subcarrier).
    """
    if frame.style != BASELINE:
        raise ParameterError("baseline estimator requires a baseline-style frame")
    geom = received.geometry
    if frame.geometry != geom:
        raise DimensionError("frame and received frame geometries disagree")
    if n_taps is None:
        n_taps = geom.l
    columns = [
        baseline_cfr_block(received.y[:, k], frame.s[:, k], n_taps, pilot_idx)
        for k in range(geom.n_blocks)
    ]
    h_phi = np.stack(columns, axis=1)
    return CfrEstimate(h_hat=h_phi @ inverse_pattern(pattern))


def cfo_estimate(received: ReceivedFrame) -> CfoEstimate:
    """Frequency offset from the lag-L correlation of the training region.

    Averages r_k(t) r_k*(t+L) over t in [L-1, (N_z-1) L - 1] and all
    blocks; the noiseless correlation is real and positive, so the angle
    of the average is exactly -2 pi eps L / N.
    """
    geom = received.geometry
    first = geom.l - 1
    last = (geom.n_z - 1) * geom.l - 1  # inclusive
    lead = received.r[first : last + 1, :]
    lagged = received.r[first + geom.l : last + 1 + geom.l, :]
    products = lead * np.conj(lagged)
    count = products.size
    correlation = complex(products.sum() / count)
    if correlation == 0:
        raise EstimationError("averaged correlation is exactly zero")
    epsilon_hat = -geom.n * np.angle(correlation) / (2.0 * np.pi * geom.l)
    return CfoEstimate(
        epsilon_hat=float(epsilon_hat),
        correlation=correlation,
        sample_count=count,
    )


def cfo_compensate(received: ReceivedFrame, epsilon_hat: float) -> ReceivedFrame:
    """De-rotate every sample by exp(-j 2 pi eps_hat (L_P k + u) / N).

    The block-cumulative L_P k term matters: the oscillator keeps running
    across blocks (cyclic prefixes included), so each block starts with an
    accumulated phase.
    """
    ramp = np.conj(phase_ramp(received.geometry, epsilon_hat))
    r = ramp * received.r
    return replace(received, r=r, y=dft(r))


def cir_estimate_block(
    r_tilde_k: np.ndarray,
    z: np.ndarray,
    geometry: FrameGeometry,
) -> np.ndarray:
    """Aggregate impulse response of one block from its training region.

    Averages training subsequences 2..N_z of the compensated block (the
    first copy is skipped: its head carries wrap-around from the previous
    symbol region) and solves the L x L circulant system built from ``z``.
    """
    r_tilde_k = np.asarray(r_tilde_k, dtype=np.complex128)
    if r_tilde_k.shape != (geometry.n,):
        raise DimensionError(
            f"block must have {geometry.n} samples, got {r_tilde_k.shape}"
        )
    z = np.asarray(z, dtype=np.complex128)
    if z.shape != (geometry.l,):
        raise DimensionError(f"z must have {geometry.l} samples, got {z.shape}")
    segments = r_tilde_k[geometry.l : geometry.n_z * geometry.l]
    averaged = segments.reshape(geometry.n_z - 1, geometry.l).mean(axis=0)
    return circulant_solve(z, averaged)


def cir_estimate_full(
    received: ReceivedFrame,
    frame: PilotFrame,
    pattern: ReflectionPattern,
) -> CirEstimate:
    """Per-path impulse responses from a compensated periodic frame."""
    if frame.style != PERIODIC:
        raise ParameterError("time-domain estimator requires a periodic-style frame")
    geom = received.geometry
    if frame.geometry != geom:
        raise DimensionError("frame and received frame geometries disagree")
    z = np.asarray(frame.z, dtype=np.complex128)
    z_cols = z if z.ndim == 2 else np.repeat(z[:, None], geom.n_blocks, axis=1)

    segments = received.r[geom.l : geom.n_z * geom.l, :]
    averaged = segments.reshape(geom.n_z - 1, geom.l, geom.n_blocks).mean(axis=0)

    # Batched circulant solves via DFT diagonalization, one spectrum per
    # block (identical when the frame shares one z).
    lam = np.fft.fft(z_cols, axis=0)
    mags = np.abs(lam)
    if (mags.min(axis=0) <= 1e-10 * mags.max(axis=0)).any():
        # Defer to the scalar path for its precise error report.
        for k in range(geom.n_blocks):
            circulant_solve(z_cols[:, k], averaged[:, k])
    g_phi = np.fft.ifft(np.fft.fft(averaged, axis=0) / lam, axis=0)
    return CirEstimate(g_hat=g_phi @ inverse_pattern(pattern), n_subcarriers=geom.n)


def joint_estimate(
    received: ReceivedFrame,
    frame: PilotFrame,
    pattern: ReflectionPattern,
) -> JointEstimate:
    """Two-stage pipeline: estimate the offset, compensate, solve the CIRs.

    Consumes only the N_z * L training samples of each block; the payload
    region never enters either stage.
    """
    cfo = cfo_estimate(received)
    compensated = cfo_compensate(received, cfo.epsilon_hat)
    cir = cir_estimate_full(compensated, frame, pattern)
    return JointEstimate(
        cfo=cfo,
        cir=cir,
        mult_counts=count_joint_multiplications(received.geometry),
    )
