"""Monte Carlo experiment runner.

An :class:`ExperimentConfig` mirrors the JSON config file format one to
one.  Any of ``m``, ``n_z``, ``snr_db`` and the fixed-offset values may be
lists; the runner expands their Cartesian product into grid points, runs
``trials`` independent trials per point, and aggregates per-trial metrics
into :class:`CurvePoint` rows.

Reproducibility contract: trial ``t`` of grid point ``p`` always draws
from ``numpy``'s PCG64 generator seeded with
``SeedSequence(base_seed, spawn_key=(p, t))``.  Results are stored by
trial index and reduced in index order with exact summation, so the output
is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import analysis
from .channel_model import exponential_pdp, sample_cir
from .errors import ConfigError, LinkSimError, TrialError
from .estimators import (
    baseline_cfr_full,
    cfo_compensate,
    joint_estimate,
    uniform_comb,
)
from .frame import FrameGeometry, build_baseline_pilots, build_periodic_pilots
from .link import transmit_frame
from .numerics import zadoff_chu
from .ris_pattern import dft_pattern

__all__ = [
    "ExperimentConfig",
    "CurvePoint",
    "run_monte_carlo",
    "run_experiment",
    "recipe",
    "emit_csv",
    "load_config",
]

ESTIMATORS = ("baseline", "proposed", "both", "complexity")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``epsilon`` is either ``{"policy": "uniform"}`` (fresh draw from
    (-0.5, 0.5] per trial) or ``{"policy": "fixed", "values": [...]}``
    (each value becomes a grid axis entry).  ``n_p`` selects a uniform comb
    of pilot subcarriers for the baseline estimator (``None`` = all).
    ``estimator`` picks which pipelines run; ``"complexity"`` evaluates the
    operation-count models instead of Monte Carlo trials.  ``out`` is the
    default CSV path used by the command line when ``--out`` is absent.
    """

    n: int
    l: int
    l_cp: int
    m: int | list = 1
    n_z: int | list = 2
    n_p: int | None = None
    snr_db: float | list = 10.0
    epsilon: dict = field(default_factory=lambda: {"policy": "uniform"})
    trials: int = 1000
    base_seed: int = 12345
    estimator: str = "proposed"
    pdp_decay: float = 1.0 / 3.0
    zc_root: int = 1
    x_axis: str = "snr_db"
    compensate_baseline: bool = True
    out: str | None = None

    def validate(self) -> None:
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not isinstance(self.epsilon, dict):
            raise ConfigError(
                f"epsilon must be a policy object like {{'policy': 'uniform'}}, "
                f"got {self.epsilon!r}"
            )
        policy = self.epsilon.get("policy")
        if policy not in ("uniform", "fixed"):
            raise ConfigError(f"unknown epsilon policy {self.epsilon!r}")
        if policy == "fixed":
            values = self.epsilon.get("values")
            if not values:
                raise ConfigError("fixed epsilon policy needs nonempty 'values'")
            for value in values:
                if not -0.5 < value <= 0.5:
                    raise ConfigError(f"fixed epsilon {value} outside (-0.5, 0.5]")
        axes = {"snr_db", "m", "n_z", "epsilon"}
        if self.x_axis not in axes:
            raise ConfigError(f"x_axis must be one of {sorted(axes)}")
        if self.x_axis == "epsilon" and policy != "fixed":
            raise ConfigError("x_axis='epsilon' requires the fixed epsilon policy")
        if self.estimator == "complexity":
            return
        try:
            for point in resolve_grid(self):
                geometry_for(self, point)
        except LinkSimError as exc:
            raise ConfigError(f"invalid geometry in grid: {exc}") from exc

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = {"n", "l", "l_cp"} - set(data)
        if missing:
            raise ConfigError(f"missing required config fields: {sorted(missing)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment configuration."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return ExperimentConfig.from_dict(data)


@dataclass(frozen=True)
class CurvePoint:
    """One aggregated number: metric value at one grid x with a 95% CI."""

    x: float
    metric: str
    mean: float
    ci95: float
    trials: int


@dataclass(frozen=True)
class GridPoint:
    """One fully resolved parameter combination."""

    index: int
    snr_db: float
    m: int
    n_z: int
    epsilon_fixed: float | None
    x: float
    label: str


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def resolve_grid(cfg: ExperimentConfig) -> list[GridPoint]:
    """Expand list-valued config fields into the Cartesian grid."""
    policy = cfg.epsilon.get("policy")
    eps_values = _as_list(cfg.epsilon.get("values")) if policy == "fixed" else [None]
    axes = {
        "snr_db": _as_list(cfg.snr_db),
        "m": _as_list(cfg.m),
        "n_z": _as_list(cfg.n_z),
        "epsilon": eps_values,
    }
    label_axes = [
        name
        for name in ("snr_db", "m", "n_z", "epsilon")
        if name != cfg.x_axis and len(axes[name]) > 1
    ]
    points = []
    combos = itertools.product(
        axes["snr_db"], axes["m"], axes["n_z"], axes["epsilon"]
    )
    for index, (snr_db, m, n_z, eps) in enumerate(combos):
        values = {"snr_db": snr_db, "m": m, "n_z": n_z, "epsilon": eps}
        labels = ",".join(f"{name}={values[name]:g}" for name in label_axes)
        points.append(
            GridPoint(
                index=index,
                snr_db=float(snr_db),
                m=int(m),
                n_z=int(n_z),
                epsilon_fixed=eps,
                x=float(values[cfg.x_axis]),
                label=f"[{labels}]" if labels else "",
            )
        )
    return points


def geometry_for(cfg: ExperimentConfig, point: GridPoint) -> FrameGeometry:
    return FrameGeometry(n=cfg.n, l=cfg.l, l_cp=cfg.l_cp, m=point.m, n_z=point.n_z)


def _trial_seed(base_seed: int, point_index: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(base_seed, spawn_key=(point_index, trial_index))


class _PointContext:
    """Per-grid-point immutable objects shared across trials."""

    def __init__(self, cfg: ExperimentConfig, point: GridPoint):
        self.cfg = cfg
        self.point = point
        self.geometry = geometry_for(cfg, point)
        self.pdp = exponential_pdp(cfg.l, cfg.pdp_decay)
        self.pattern = dft_pattern(point.m)
        self.z = zadoff_chu(cfg.l, cfg.zc_root)
        self.sigma2 = 10.0 ** (-point.snr_db / 10.0)
        self.pilot_idx = None if cfg.n_p is None else uniform_comb(cfg.n, cfg.n_p)

    def draw_epsilon(self, rng: np.random.Generator) -> float:
        if self.point.epsilon_fixed is not None:
            return float(self.point.epsilon_fixed)
        return 0.5 - rng.random()  # uniform over (-0.5, 0.5]


def run_trial(ctx: _PointContext, rng: np.random.Generator) -> dict:
    """One independent trial; returns a flat dict of metric values.

    Draw order is fixed (periodic frame payload, baseline pilots, channel,
    offset, noise per transmission) so results are reproducible from the
    trial seed alone.
    """
    cfg = ctx.cfg
    geom = ctx.geometry
    run_proposed = cfg.estimator in ("proposed", "both")
    run_baseline = cfg.estimator in ("baseline", "both")

    frame_p = build_periodic_pilots(geom, ctx.z, rng) if run_proposed else None
    frame_b = build_baseline_pilots(geom, rng) if run_baseline else None
    channels = sample_cir(ctx.pdp, geom.m, cfg.n, rng)
    epsilon = ctx.draw_epsilon(rng)

    out: dict[str, float] = {}
    h_energy = float(np.vdot(channels.h, channels.h).real)
    epsilon_hat = None

    if run_proposed:
        rx_p = transmit_frame(frame_p, channels, ctx.pattern, epsilon, ctx.sigma2, rng)
        joint = joint_estimate(rx_p, frame_p, ctx.pattern)
        epsilon_hat = joint.cfo.epsilon_hat
        out["cfo_mse"] = analysis.mse_cfo(epsilon, epsilon_hat)
        g_err = joint.cir.g_hat - channels.g
        out["cir_nmse_num"] = float(np.vdot(g_err, g_err).real)
        out["cir_nmse_den"] = float(np.vdot(channels.g, channels.g).real)
        out["cir_nmse"] = out["cir_nmse_num"] / out["cir_nmse_den"]
        h_err = joint.cir.h_hat - channels.h
        out["cfr_nmse_proposed_num"] = float(np.vdot(h_err, h_err).real)
        out["cfr_nmse_proposed_den"] = h_energy
        out["cfr_nmse_proposed"] = out["cfr_nmse_proposed_num"] / h_energy

    if run_baseline:
        rx_b = transmit_frame(frame_b, channels, ctx.pattern, epsilon, ctx.sigma2, rng)
        compensated = cfg.compensate_baseline and epsilon_hat is not None
        rx_used = cfo_compensate(rx_b, epsilon_hat) if compensated else rx_b
        estimate = baseline_cfr_full(rx_used, frame_b, ctx.pattern, pilot_idx=ctx.pilot_idx)
        h_err = estimate.h_hat - channels.h
        out["cfr_nmse_baseline_num"] = float(np.vdot(h_err, h_err).real)
        out["cfr_nmse_baseline_den"] = h_energy
        out["cfr_nmse_baseline"] = out["cfr_nmse_baseline_num"] / h_energy
        if compensated:
            raw = baseline_cfr_full(rx_b, frame_b, ctx.pattern, pilot_idx=ctx.pilot_idx)
            raw_err = raw.h_hat - channels.h
            out["cfr_nmse_baseline_uncomp"] = float(np.vdot(raw_err, raw_err).real) / h_energy

    return out


def _mean_ci(values: np.ndarray) -> tuple[float, float]:
    trials = values.shape[0]
    mean = math.fsum(values) / trials
    if trials < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
    return mean, 1.96 * math.sqrt(var / trials)


def _aggregate_point(
    cfg: ExperimentConfig, point: GridPoint, samples: dict[str, np.ndarray]
) -> list[CurvePoint]:
    points = []
    for name in sorted(samples):
        if name.endswith("_num") or name.endswith("_den"):
            continue
        mean, ci = _mean_ci(samples[name])
        points.append(
            CurvePoint(point.x, name + point.label, mean, ci, cfg.trials)
        )
    # Ratio-of-means variants for the normalized errors: this matches the
    # expectation-ratio definition of the NMSE, while the plain metric above
    # is the mean per-realization ratio.
    for name in sorted(samples):
        if not name.endswith("_num"):
            continue
        base = name[: -len("_num")]
        num = samples[name]
        den = samples[base + "_den"]
        total_den = math.fsum(den)
        rom = math.fsum(num) / total_den
        mean_den = total_den / den.shape[0]
        residuals = (num - rom * den) / mean_den
        _, ci = _mean_ci(residuals)
        points.append(CurvePoint(point.x, base + "_rom" + point.label, rom, ci, cfg.trials))
    if (
        cfg.estimator in ("baseline", "both")
        and point.epsilon_fixed is not None
        and not cfg.compensate_baseline
        and cfg.n_p is None
    ):
        params = analysis.NmseParams(
            epsilon=point.epsilon_fixed,
            n=cfg.n,
            l=cfg.l,
            l_cp=cfg.l_cp,
            m=point.m,
            sigma2=10.0 ** (-point.snr_db / 10.0),
        )
        points.append(
            CurvePoint(
                point.x,
                "nmse_closed_form" + point.label,
                analysis.nmse_closed_form(params),
                0.0,
                0,
            )
        )
    return points


def run_monte_carlo(cfg: ExperimentConfig, workers: int = 1) -> list[CurvePoint]:
    """Run the full grid; byte-reproducible for any ``workers`` value."""
    cfg.validate()
    if cfg.estimator == "complexity":
        raise ConfigError("complexity configs are analytic; use run_experiment")
    curve: list[CurvePoint] = []
    for point in resolve_grid(cfg):
        ctx = _PointContext(cfg, point)
        storage: dict[str, np.ndarray] = {}

        def run_range(lo: int, hi: int) -> None:
            for trial in range(lo, hi):
                rng = np.random.default_rng(
                    _trial_seed(cfg.base_seed, point.index, trial)
                )
                try:
                    metrics = run_trial(ctx, rng)
                except Exception as exc:  # noqa: BLE001 - report the seed
                    raise TrialError(point.index, trial, cfg.base_seed, exc) from exc
                for key, value in metrics.items():
                    if key not in storage:
                        storage[key] = np.empty(cfg.trials)
                    storage[key][trial] = value

        if workers <= 1:
            run_range(0, cfg.trials)
        else:
            # Pre-create storage deterministically from trial 0, then fan out.
            run_range(0, 1)
            chunk = -(-cfg.trials // workers)
            bounds = [
                (max(1, i * chunk), min(cfg.trials, (i + 1) * chunk))
                for i in range(workers)
            ]
            bounds = [(lo, hi) for lo, hi in bounds if lo < hi]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for future in [pool.submit(run_range, lo, hi) for lo, hi in bounds]:
                    future.result()
        curve.extend(_aggregate_point(cfg, point, storage))
    return curve


def _complexity_curve(cfg: ExperimentConfig) -> list[CurvePoint]:
    n_p = cfg.n_p if cfg.n_p is not None else cfg.n
    points = []
    for point in resolve_grid(cfg):
        cfr = analysis.complexity_cfr(cfg.n, cfg.l, n_p, point.m).total
        joint = analysis.complexity_joint(cfg.l, point.n_z, point.m).total
        for metric, value in (
            ("complexity_cfr", cfr),
            ("complexity_joint", joint),
            ("complexity_ratio", cfr / joint),
        ):
            points.append(CurvePoint(point.x, metric + point.label, value, 0.0, 0))
    return points


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[CurvePoint]:
    """Dispatch: Monte Carlo for estimator configs, analytic otherwise."""
    cfg.validate()
    if cfg.estimator == "complexity":
        return _complexity_curve(cfg)
    return run_monte_carlo(cfg, workers=workers)


def recipe(name: str) -> ExperimentConfig:
    """Preset experiment configurations.

    ``fig2``: closed-form NMSE overlay versus Monte Carlo for the baseline
    estimator under fixed offsets (N=64, L=8, L_CP=10, QPSK pilots).
    ``fig3``: analytic complexity sweep over the element count.
    ``fig4a``/``fig4b``: offset-estimation MSE and channel NMSE versus SNR
    for the proposed pipeline (and the compensated baseline in 4b) with
    L=32, L_CP=34 and uniform random offsets.  The element/subcarrier
    grids of the 4x presets are representative placeholders; sweep them
    with your own configs as needed.
    """
    if name == "fig2":
        return ExperimentConfig(
            n=64,
            l=8,
            l_cp=10,
            m=[1, 2, 4, 8, 16, 32, 64, 128],
            n_z=2,
            snr_db=20.0,
            epsilon={"policy": "fixed", "values": [0.0, 0.005, 0.01, 0.05]},
            trials=5000,
            estimator="baseline",
            x_axis="m",
            compensate_baseline=False,
        )
    if name == "fig3":
        return ExperimentConfig(
            n=1024,
            l=102,
            l_cp=102,
            m=[2**i for i in range(11)],
            n_z=4,
            n_p=1024,
            trials=1,
            estimator="complexity",
            x_axis="m",
        )
    if name == "fig4a":
        return ExperimentConfig(
            n=256,
            l=32,
            l_cp=34,
            m=[16, 64],
            n_z=4,
            snr_db=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            epsilon={"policy": "uniform"},
            trials=5000,
            estimator="proposed",
            x_axis="snr_db",
        )
    if name == "fig4b":
        return ExperimentConfig(
            n=256,
            l=32,
            l_cp=34,
            m=16,
            n_z=4,
            n_p=128,
            snr_db=[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            epsilon={"policy": "uniform"},
            trials=5000,
            estimator="both",
            x_axis="snr_db",
            compensate_baseline=True,
        )
    raise ConfigError(f"unknown recipe {name!r}")


def emit_csv(points: list[CurvePoint], path) -> None:
    """Write curve points as CSV, sorted by (metric, x), 12 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "metric", "mean", "ci95", "trials"])
            for p in sorted(points, key=lambda p: (p.metric, p.x)):
                writer.writerow(
                    [f"{p.x:.12g}", p.metric, f"{p.mean:.12g}", f"{p.ci95:.12g}", p.trials]
                )
    except OSError as exc:
        raise ConfigError(f"cannot write CSV {path}: {exc}") from exc


def read_csv(path) -> list[CurvePoint]:
    """Read back a CSV written by :func:`emit_csv`."""
    points = []
    try:
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                points.append(
                    CurvePoint(
                        x=float(row["x"]),
                        metric=row["metric"],
                        mean=float(row["mean"]),
                        ci95=float(row["ci95"]),
                        trials=int(row["trials"]),
                    )
                )
    except OSError as exc:
        raise ConfigError(f"cannot read CSV {path}: {exc}") from exc
    return points
