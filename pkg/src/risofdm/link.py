"""Physical link: multipath channel, RIS reflection, CFO rotation, AWGN.

Each block k sees the aggregate impulse response g_phi_k = G @ phi_k.
After cyclic-prefix removal the received block is the mod-N circular
convolution of the transmitted symbol with g_phi_k (exact because
l_cp >= l), rotated sample-by-sample by the oscillator-offset phase ramp
exp(j 2 pi eps (L_P k + u) / N), plus white complex Gaussian noise of
variance sigma2 per sample.  The prefix samples themselves are never
observed by an estimator, so they are not materialized.

In the frequency domain the same signal is exp(j 2 pi eps L_P k / N) *
Lambda(eps) diag(s_k) H phi_k + w_k with the leakage matrix from
:func:`risofdm.numerics.build_lambda`; the equivalence of the two forms is
part of the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel_model import ChannelSet
from .errors import DimensionError, ParameterError
from .frame import FrameGeometry, PilotFrame
from .numerics import dft
from .ris_pattern import ReflectionPattern

__all__ = ["ReceivedFrame", "transmit_frame", "freq_rx", "phase_ramp", "awgn"]


@dataclass(frozen=True)
class ReceivedFrame:
    """Post-CP-removal received frame.

    ``r`` holds time-domain samples (N x (M+1)), ``y`` their unitary DFT.
    ``epsilon_true`` and ``sigma2`` are ground-truth metadata for metrics
    only; estimators must never read them.  Factories guarantee the
    r/y consistency invariant; :meth:`validate` re-checks it.
    """

    geometry: FrameGeometry
    r: np.ndarray
    y: np.ndarray
    epsilon_true: float
    sigma2: float

    def validate(self) -> None:
        expected = (self.geometry.n, self.geometry.n_blocks)
        if self.r.shape != expected or self.y.shape != expected:
            raise DimensionError(
                f"received frame arrays must have shape {expected}, "
                f"got {self.r.shape} / {self.y.shape}"
            )
        scale = max(1.0, float(np.abs(self.y).max()))
        if np.abs(self.y - dft(self.r)).max() > 1e-12 * scale:
            raise DimensionError("y is not the DFT of r")


@lru_cache(maxsize=32)
def _conv_index(n: int, l: int) -> np.ndarray:
    """Gather index so that x[idx] @ g is the mod-n convolution by g."""
    return (np.arange(n)[:, None] - np.arange(l)[None, :]) % n


def phase_ramp(geometry: FrameGeometry, epsilon: float) -> np.ndarray:
    """CFO rotation exp(j 2 pi eps (L_P k + u) / N) for all (u, k)."""
    u = np.arange(geometry.n)[:, None]
    k = np.arange(geometry.n_blocks)[None, :]
    return np.exp(2j * np.pi * epsilon * (geometry.l_p * k + u) / geometry.n)


def awgn(rng: np.random.Generator, shape, sigma2: float) -> np.ndarray:
    """Circularly-symmetric complex Gaussian noise, variance sigma2/sample."""
    if sigma2 < 0:
        raise ParameterError(f"noise variance must be nonnegative, got {sigma2}")
    if sigma2 == 0:
        return np.zeros(shape, dtype=np.complex128)
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def transmit_frame(
    frame: PilotFrame,
    channels: ChannelSet,
    pattern: ReflectionPattern,
    epsilon: float,
    sigma2: float,
    rng: np.random.Generator,
) -> ReceivedFrame:
    """Run one frame through the channel model.

    ``epsilon`` is the frequency offset in subcarrier spacings, restricted
    to (-0.5, 0.5]; ``sigma2`` the per-sample noise variance (SNR is
    1/sigma2 under the unit-power frames built by :mod:`risofdm.frame`).
    """
    geom = frame.geometry
    if not -0.5 < epsilon <= 0.5:
        raise ParameterError(f"epsilon must lie in (-0.5, 0.5], got {epsilon}")
    if channels.n_taps != geom.l or channels.n_subcarriers != geom.n:
        raise DimensionError(
            f"channel set is {channels.n_taps} taps x {channels.n_subcarriers} "
            f"subcarriers; frame geometry wants {geom.l} x {geom.n}"
        )
    if channels.n_paths != geom.n_blocks or pattern.n_blocks != geom.n_blocks:
        raise DimensionError(
            f"paths/pattern/blocks disagree: {channels.n_paths} paths, "
            f"{pattern.n_blocks} pattern columns, {geom.n_blocks} blocks"
        )

    g_phi = channels.g @ pattern.phi  # (l, m+1) aggregate CIR per block
    gathered = frame.x[_conv_index(geom.n, geom.l), :]  # (n, l, m+1)
    clean = np.einsum("ulk,lk->uk", gathered, g_phi)
    r = phase_ramp(geom, epsilon) * clean + awgn(rng, clean.shape, sigma2)
    return ReceivedFrame(
        geometry=geom, r=r, y=dft(r), epsilon_true=epsilon, sigma2=sigma2
    )


def freq_rx(received: ReceivedFrame) -> np.ndarray:
    """Frequency-domain view of the received frame (unitary DFT of r)."""
    return dft(received.r)
