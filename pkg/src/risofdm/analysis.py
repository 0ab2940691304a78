"""Closed-form performance and complexity models, plus error metrics.

The centerpiece is the closed-form normalized MSE of the frequency-domain
pilot estimator under a frequency offset: with unit-modulus pilots and a
scaled-unitary reflection pattern,

    NMSE(eps) = sigma2 L / (N (M+1)) + 2
                - 2 [sin(pi eps) / (N sin(pi eps / N))]
                  * [sin((M+1) pi eps L_P / N) / ((M+1) sin(pi eps L_P / N))]
                  * cos(pi eps (M L_P + N - 1) / N).

At eps = 0 only the noise term survives; as M grows with eps != 0 the
oscillatory term dies out and the NMSE saturates at 2.  Removable
singularities are evaluated by their limits.

Complexity formulas follow the convention that each leading term carries a
unit coefficient; measured counters (complex multiplications) use the
dense-solve operation model of the algorithms as analyzed, so counts stay
comparable to the formulas regardless of FFT shortcuts inside the
implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .frame import FrameGeometry

__all__ = [
    "NmseParams",
    "nmse_closed_form",
    "nmse_turning_point",
    "ComplexityBreakdown",
    "complexity_cfr",
    "complexity_joint",
    "MultiplicationCounts",
    "count_joint_multiplications",
    "nmse_freq",
    "nmse_time",
    "mse_cfo",
]

# Below this |pi eps / N| the oscillatory part is evaluated by its eps -> 0
# limit (exactly the noise-only value).
_EPS_LIMIT_THRESHOLD = 1e-8


@dataclass(frozen=True)
class NmseParams:
    """Parameters of the closed-form NMSE expression.

    ``sigma2`` is the per-sample noise variance under unit-power pilots,
    so SNR = 1/sigma2.  ``l_p`` is the derived pilot block length.
    """

    epsilon: float
    n: int
    l: int
    l_cp: int
    m: int
    sigma2: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"n must be positive, got {self.n}")
        if not 0 <= self.l <= self.n:
            raise ParameterError(f"l must lie in [0, n], got {self.l}")
        if self.m < 0:
            raise ParameterError(f"m must be nonnegative, got {self.m}")
        if self.sigma2 < 0:
            raise ParameterError(f"sigma2 must be nonnegative, got {self.sigma2}")

    @property
    def l_p(self) -> int:
        return self.l_cp + self.n


def _lobe_ratio(k: int, t: float) -> float:
    """sin(k t) / (k sin t), stabilized at the removable singularities."""
    r = math.remainder(t, math.pi)
    m = round((t - r) / math.pi)
    sign = -1.0 if (m * (k - 1)) % 2 else 1.0
    if r == 0.0:
        return sign
    return sign * math.sin(k * r) / (k * math.sin(r))


def nmse_closed_form(params: NmseParams) -> float:
    """Evaluate the closed-form NMSE at one parameter point."""
    noise = params.sigma2 * params.l / (params.n * (params.m + 1))
    if abs(math.pi * params.epsilon / params.n) < _EPS_LIMIT_THRESHOLD:
        return noise
    carrier = _lobe_ratio(params.n, math.pi * params.epsilon / params.n)
    blocks = _lobe_ratio(
        params.m + 1, math.pi * params.epsilon * params.l_p / params.n
    )
    cosine = math.cos(
        math.pi * params.epsilon * (params.m * params.l_p + params.n - 1) / params.n
    )
    return noise + 2.0 - 2.0 * carrier * blocks * cosine


def nmse_turning_point(
    epsilon: float,
    n: int,
    l: int,
    l_cp: int,
    sigma2: float,
    m_max: int,
) -> int | None:
    """Smallest M in [0, m_max) where the closed-form NMSE starts rising.

    Scans the grid M = 0 .. m_max and returns the first M with
    NMSE(M+1) > NMSE(M), or ``None`` when the curve is still decreasing
    everywhere below ``m_max``.
    """
    if epsilon == 0:
        raise ParameterError("turning point is undefined at epsilon = 0")
    if m_max < 1:
        raise ParameterError(f"m_max must be positive, got {m_max}")
    m_grid = np.arange(m_max + 1)
    l_p = l_cp + n
    noise = sigma2 * l / (n * (m_grid + 1.0))
    t = math.pi * epsilon * l_p / n
    carrier = _lobe_ratio(n, math.pi * epsilon / n)
    with np.errstate(invalid="ignore", divide="ignore"):
        blocks = np.sin((m_grid + 1.0) * t) / ((m_grid + 1.0) * math.sin(t))
    cosine = np.cos(math.pi * epsilon * (m_grid * l_p + n - 1.0) / n)
    values = noise + 2.0 - 2.0 * carrier * blocks * cosine
    rising = np.nonzero(np.diff(values) > 0)[0]
    return int(rising[0]) if rising.size else None


@dataclass(frozen=True)
class ComplexityBreakdown:
    """Leading-term operation count with the per-term split exposed."""

    terms: dict

    @property
    def total(self) -> float:
        return float(sum(self.terms.values()))


def complexity_cfr(n: int, l: int, n_p: int, m: int) -> ComplexityBreakdown:
    """Frequency-domain estimator cost: (L N_p^2 + N^2) M + N M^2 + M^3."""
    if min(n, l, n_p, m) < 1:
        raise ParameterError("complexity parameters must be positive")
    return ComplexityBreakdown(
        terms={
            "pilot_ls": float(l) * n_p**2 * m,
            "transform": float(n) ** 2 * m,
            "combine": float(n) * m**2,
            "pattern_inverse": float(m) ** 3,
        }
    )


def complexity_joint(l: int, n_z: int, m: int) -> ComplexityBreakdown:
    """Joint estimator cost: (L N_z + L^2) M + L M^2 + M^3.

    The L N_z M term is the correlation stage; the remainder is the
    time-domain least-squares stage.
    """
    if min(l, n_z, m) < 1:
        raise ParameterError("complexity parameters must be positive")
    return ComplexityBreakdown(
        terms={
            "cfo": float(l) * n_z * m,
            "cir_solve": float(l) ** 2 * m,
            "combine": float(l) * m**2,
            "pattern_inverse": float(m) ** 3,
        }
    )


@dataclass(frozen=True)
class MultiplicationCounts:
    """Complex-multiplication counts of one joint-estimation run.

    Buckets follow the reference operation model of each stage:

    * ``cfo_correlation``: one product per correlation sample.
    * ``compensation``: one rotation per training-region sample actually
      consumed downstream.
    * ``cir_average``: scaling of the averaged subsequence per block.
    * ``cir_solve``: dense application of the precomputed pilot-circulant
      inverse, L^2 per block.
    * ``combine``: right-multiplication of the stacked estimates by the
      pattern inverse.
    * ``pattern_inverse``: generic cost of forming that inverse.
    """

    cfo_correlation: int
    compensation: int
    cir_average: int
    cir_solve: int
    combine: int
    pattern_inverse: int

    @property
    def cfo_stage(self) -> int:
        return self.cfo_correlation

    @property
    def cir_stage(self) -> int:
        return (
            self.compensation
            + self.cir_average
            + self.cir_solve
            + self.combine
            + self.pattern_inverse
        )

    @property
    def total(self) -> int:
        return self.cfo_stage + self.cir_stage


def count_joint_multiplications(geometry: FrameGeometry) -> MultiplicationCounts:
    """Operation counts of the joint pipeline for one frame geometry."""
    blocks = geometry.n_blocks
    l = geometry.l
    n_z = geometry.n_z
    return MultiplicationCounts(
        cfo_correlation=((n_z - 2) * l + 1) * blocks,
        compensation=(n_z - 1) * l * blocks,
        cir_average=l * blocks,
        cir_solve=l * l * blocks,
        combine=l * blocks * blocks,
        pattern_inverse=blocks**3,
    )


def nmse_freq(h: np.ndarray, h_hat: np.ndarray) -> float:
    """Per-realization normalized error ||h - h_hat||^2 / ||h||^2."""
    h = np.asarray(h)
    h_hat = np.asarray(h_hat)
    if h.shape != h_hat.shape:
        raise DimensionError(f"shape mismatch: {h.shape} vs {h_hat.shape}")
    denom = float(np.vdot(h, h).real)
    if denom == 0.0:
        raise ParameterError("reference response has zero energy")
    diff = h - h_hat
    return float(np.vdot(diff, diff).real) / denom


def nmse_time(g: np.ndarray, g_hat: np.ndarray) -> float:
    """Per-realization normalized error on impulse responses."""
    return nmse_freq(g, g_hat)


def mse_cfo(epsilon: float, epsilon_hat: float) -> float:
    """Squared frequency-offset estimation error |eps - eps_hat|^2."""
    return float(abs(epsilon - epsilon_hat) ** 2)
