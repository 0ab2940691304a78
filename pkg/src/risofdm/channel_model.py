"""Frequency-selective Rayleigh channels for the direct and reflected paths.

Every path (direct plus one per reflecting element) draws an independent
L-tap impulse response with circularly-symmetric Gaussian taps whose
variances follow a shared power delay profile; the elements are collocated,
so one profile describes them all.  The per-subcarrier gain of a path is
the plain (unnormalized) DFT of its zero-padded impulse response: with a
unit-energy tap profile every subcarrier gain has unit variance, which is
the scale the estimators and the closed-form error analysis are written
in.  The unitary transforms in :mod:`risofdm.numerics` are reserved for
signal synthesis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

__all__ = [
    "PowerDelayProfile",
    "ChannelSet",
    "exponential_pdp",
    "sample_cir",
    "cir_to_cfr",
    "aggregate_cfr",
    "aggregate_cir",
    "dump_channel_csv",
]


@dataclass(frozen=True)
class PowerDelayProfile:
    """Per-tap average powers, normalized to unit total power."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        object.__setattr__(self, "p", p)
        if p.ndim != 1 or p.shape[0] < 1:
            raise ParameterError("power delay profile must be a nonempty 1-D array")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ParameterError("power delay profile needs finite nonnegative taps")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ParameterError(f"power delay profile must sum to 1, got {p.sum()!r}")

    @property
    def n_taps(self) -> int:
        return self.p.shape[0]


def exponential_pdp(n_taps: int, decay: float) -> PowerDelayProfile:
    """Exponentially decaying profile p(l) ~ exp(-decay * l), unit sum."""
    if n_taps < 1:
        raise ParameterError(f"exponential_pdp needs n_taps >= 1, got {n_taps}")
    if not decay > 0:
        raise ParameterError(f"exponential_pdp needs decay > 0, got {decay}")
    raw = np.exp(-decay * np.arange(n_taps, dtype=np.float64))
    return PowerDelayProfile(raw / raw.sum())


@dataclass(frozen=True)
class ChannelSet:
    """One realization of all M+1 path channels.

    ``g`` stacks the impulse responses column-wise (shape L x (M+1), column
    0 is the direct path) and ``h`` holds the matching subcarrier gains
    (shape N x (M+1)), each column the unnormalized DFT of the zero-padded
    column of ``g``.
    """

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.complex128)
        h = np.asarray(self.h, dtype=np.complex128)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h", h)
        if g.ndim != 2 or h.ndim != 2 or g.shape[1] != h.shape[1]:
            raise DimensionError("g and h must be 2-D with one column per path")
        if g.shape[0] > h.shape[0]:
            raise DimensionError("channel length exceeds subcarrier count")
        if not (np.isfinite(g).all() and np.isfinite(h).all()):
            raise ParameterError("channel realizations must be finite")

    @property
    def n_taps(self) -> int:
        return self.g.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.h.shape[0]

    @property
    def n_paths(self) -> int:
        return self.g.shape[1]


def cir_to_cfr(g: np.ndarray, n_subcarriers: int) -> np.ndarray:
    """Subcarrier gains of an L-tap impulse response (or a stack of them).

    Zero-pads to ``n_subcarriers`` and applies the plain DFT, so an impulse
    ``[1, 0, ...]`` maps to an all-ones response.
    """
    g = np.asarray(g, dtype=np.complex128)
    if g.shape[0] > n_subcarriers:
        raise DimensionError(
            f"impulse response has {g.shape[0]} taps, more than {n_subcarriers} subcarriers"
        )
    return np.fft.fft(g, n=n_subcarriers, axis=0)


def sample_cir(
    pdp: PowerDelayProfile,
    n_reflectors: int,
    n_subcarriers: int,
    rng: np.random.Generator,
) -> ChannelSet:
    """Draw impulse responses for the direct path and ``n_reflectors`` paths.

    Tap (l, m) is complex Gaussian with variance ``pdp.p[l]``, independent
    across taps and paths.  The caller owns the random stream, so trials
    can run concurrently on independent generators.
    """
    if n_reflectors < 0:
        raise ParameterError(f"sample_cir needs n_reflectors >= 0, got {n_reflectors}")
    if pdp.n_taps > n_subcarriers:
        raise ParameterError(
            f"channel length {pdp.n_taps} exceeds subcarrier count {n_subcarriers}"
        )
    shape = (pdp.n_taps, n_reflectors + 1)
    scale = np.sqrt(pdp.p / 2.0)[:, None]
    g = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelSet(g=g, h=cir_to_cfr(g, n_subcarriers))


def aggregate_cfr(h: np.ndarray, phi_k: np.ndarray) -> np.ndarray:
    """Overall subcarrier response of one pilot block: h @ phi_k."""
    h = np.asarray(h)
    phi_k = np.asarray(phi_k)
    if h.ndim != 2 or phi_k.shape != (h.shape[1],):
        raise DimensionError(
            f"aggregate_cfr needs h (N, M+1) and phi_k (M+1,), got {h.shape} and {phi_k.shape}"
        )
    return h @ phi_k


def aggregate_cir(g: np.ndarray, phi_k: np.ndarray) -> np.ndarray:
    """Overall impulse response of one pilot block: g @ phi_k."""
    g = np.asarray(g)
    phi_k = np.asarray(phi_k)
    if g.ndim != 2 or phi_k.shape != (g.shape[1],):
        raise DimensionError(
            f"aggregate_cir needs g (L, M+1) and phi_k (M+1,), got {g.shape} and {phi_k.shape}"
        )
    return g @ phi_k


def dump_channel_csv(channels: ChannelSet, path) -> None:
    """Debug dump of the impulse responses as rows (m, l, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "l", "re", "im"])
        for m in range(channels.n_paths):
            for l in range(channels.n_taps):
                tap = channels.g[l, m]
                writer.writerow([m, l, repr(float(tap.real)), repr(float(tap.imag))])
