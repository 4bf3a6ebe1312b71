"""Monte Carlo orchestration: replication control, CLT verification for the
integrated-volatility estimator, and rate regressions.

Each replication owns an independent counter-based RNG stream keyed by
(master_seed, replication index), so results are bit-identical for any
worker-pool size; aggregation always walks replications in index order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy import stats

from . import volmodel
from .estimators import integrated_volatility_estimate, spot_estimate
from .simulate import BlockGrid, simulate_observations
from .spectral import block_coefficients
from .volmodel import VolatilitySpec

KS_CRITICAL_COEF = 1.63  # level-0.01 coefficient: reject when KS > 1.63/sqrt(M)


@dataclass(frozen=True)
class ExperimentConfig:
    spec: VolatilitySpec
    n: int
    delta: float
    replications: int
    h0_rule: Union[float, str] = "log"        # fixed value or "log" for h0 = log n
    J_rule: Union[int, str] = "loglog"        # fixed value or "loglog" for ceil(log n * log log n)
    bandwidth_rule: Union[float, str] = "rate"  # fixed value or "rate" for (eps log(1/eps))^{1/3}
    bandwidth_scale: float = 1.0
    master_seed: int = 0
    parallelism: int = 1
    clip_floor: float = 1e-4
    noise_convention: str = "eps2"
    spot_eval_points: int = 257

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.n < 16:
            raise ValueError("n must be >= 16")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


@dataclass(frozen=True)
class ResolvedDesign:
    main_grid: BlockGrid
    spot_grid: BlockGrid
    bandwidth: float
    block_positions: np.ndarray
    eval_positions: np.ndarray


def resolve_design(cfg: ExperimentConfig) -> ResolvedDesign:
    n = cfg.n
    eps = cfg.delta / np.sqrt(n)
    h0_target = float(np.log(n)) if cfg.h0_rule == "log" else float(cfg.h0_rule)
    if cfg.J_rule == "loglog":
        J = int(np.ceil(np.log(n) * np.log(np.log(n))))
    else:
        J = int(cfg.J_rule)
    K = max(2, round(1.0 / (h0_target * eps)))
    K = min(K, n // 2)
    J = max(1, min(J, (n // K) // 2))  # resolution cap: stay below the cell count per block
    main = BlockGrid(K=K, J=J, eps=eps)
    K_spot = min(max(2, round(1.0 / eps)), n // 2)
    spot = BlockGrid(K=K_spot, J=1, eps=eps)
    if cfg.bandwidth_rule == "rate":
        b = cfg.bandwidth_scale * float((eps * np.log(1.0 / eps)) ** (1.0 / 3.0))
    else:
        b = float(cfg.bandwidth_rule)
    b = max(b, spot.h)
    return ResolvedDesign(
        main_grid=main,
        spot_grid=spot,
        bandwidth=b,
        block_positions=np.arange(K) * main.h,
        eval_positions=np.linspace(0.0, 1.0, cfg.spot_eval_points),
    )


@dataclass(frozen=True)
class ReplicationResult:
    index: int
    iv_value: float = np.nan
    avar_hat: float = np.nan
    spot_sup_error: float = np.nan
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None or not np.isfinite(self.iv_value)


def replication_seed(master_seed: int, index: int) -> int:
    return (int(master_seed) << 32) ^ int(index)


def _run_replication(cfg: ExperimentConfig, index: int) -> ReplicationResult:
    design = resolve_design(cfg)
    try:
        obs = simulate_observations(cfg.spec, cfg.n, cfg.delta, replication_seed(cfg.master_seed, index))
        spot_coeffs = block_coefficients(obs, design.spot_grid)
        spot_at_blocks = spot_estimate(
            spot_coeffs, cfg.n, cfg.delta, design.bandwidth,
            design.block_positions, cfg.clip_floor,
        )
        main_coeffs = block_coefficients(obs, design.main_grid)
        est = integrated_volatility_estimate(
            main_coeffs, spot_at_blocks, design.main_grid, cfg.delta, cfg.n,
            true_spec=cfg.spec, noise_convention=cfg.noise_convention,
        )
        spot_eval = spot_estimate(
            spot_coeffs, cfg.n, cfg.delta, design.bandwidth,
            design.eval_positions, cfg.clip_floor,
        )
        sup_err = float(np.max(np.abs(
            spot_eval.estimates - volmodel.sigma_squared(cfg.spec, design.eval_positions)
        )))
        return ReplicationResult(
            index=index, iv_value=est.value, avar_hat=est.avar_hat, spot_sup_error=sup_err,
        )
    except Exception as exc:  # replication-level failures are recorded, not raised
        return ReplicationResult(index=index, error=f"{type(exc).__name__}: {exc}")


def _worker(args) -> ReplicationResult:
    return _run_replication(*args)


class TooManyFailuresError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCReport:
    config: ExperimentConfig
    iv_values: tuple
    avar_hats: tuple
    spot_sup_errors: tuple
    failures: tuple
    summary: dict

    def recompute_summary(self) -> dict:
        return summarize(self.config, self.iv_values, self.spot_sup_errors,
                         len(self.failures), self.summary["wall_time"])


def summarize(cfg: ExperimentConfig, iv_values, spot_sup_errors, n_failed, wall_time) -> dict:
    values = np.asarray(iv_values, dtype=np.float64)
    target_iv = volmodel.true_integrated_volatility(cfg.spec)
    target_avar = 8.0 * cfg.delta * volmodel.integrated_power(cfg.spec, 3, 0.0, 1.0)
    scaled = cfg.n ** 0.25 * (values - target_iv)
    studentized = scaled / np.sqrt(target_avar)
    m = values.size
    summary = {
        "replications": m,
        "failed": int(n_failed),
        "target_iv": target_iv,
        "target_avar": target_avar,
        "mean_scaled": float(np.mean(scaled)),
        "bias_scaled": float(np.mean(scaled)),
        "variance_scaled": float(np.var(scaled, ddof=1)) if m > 1 else float("nan"),
        "variance_ratio": float(np.var(scaled, ddof=1) / target_avar) if m > 1 else float("nan"),
        "skewness": float(stats.skew(studentized)) if m > 2 else float("nan"),
        "kurtosis": float(stats.kurtosis(studentized)) if m > 3 else float("nan"),
        "ks_statistic": float(stats.kstest(studentized, "norm").statistic) if m > 1 else float("nan"),
        "rmse_iv": float(np.sqrt(np.mean((values - target_iv) ** 2))),
        "mean_spot_sup_error": float(np.mean(spot_sup_errors)) if len(spot_sup_errors) else float("nan"),
        "wall_time": wall_time,
    }
    return summary


def run_iv_mc(cfg: ExperimentConfig) -> MCReport:
    """Full pipeline per replication, deterministic merge by replication index.

    Raises TooManyFailuresError when more than 1% of replications fail.
    """
    start = time.perf_counter()
    tasks = [(cfg, i) for i in range(cfg.replications)]
    if cfg.parallelism > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallelism) as pool:
            chunk = max(1, cfg.replications // (4 * cfg.parallelism))
            results = list(pool.map(_worker, tasks, chunksize=chunk))
    else:
        results = [_run_replication(cfg, i) for i in range(cfg.replications)]
    results.sort(key=lambda r: r.index)
    failures = tuple((r.index, r.error) for r in results if r.failed)
    if len(failures) > 0.01 * cfg.replications:
        raise TooManyFailuresError(
            f"{len(failures)} of {cfg.replications} replications failed; first: {failures[0]}"
        )
    good = [r for r in results if not r.failed]
    wall = time.perf_counter() - start
    iv_values = tuple(r.iv_value for r in good)
    sups = tuple(r.spot_sup_error for r in good)
    return MCReport(
        config=cfg,
        iv_values=iv_values,
        avar_hats=tuple(r.avar_hat for r in good),
        spot_sup_errors=sups,
        failures=failures,
        summary=summarize(cfg, iv_values, sups, len(failures), wall),
    )


def normality_check(report: MCReport):
    """KS test of the studentized estimates against the standard normal.

    Passes when the KS statistic is below the level-0.01 critical value
    1.63/sqrt(M); requires at least 200 replications.
    """
    m = len(report.iv_values)
    if m < 200:
        raise ValueError(f"need at least 200 replications for the normality check, got {m}")
    ks = report.summary["ks_statistic"]
    critical = KS_CRITICAL_COEF / np.sqrt(m)
    return ks < critical, {"ks_statistic": ks, "critical": critical, "replications": m}


@dataclass(frozen=True)
class RateReport:
    n_values: tuple
    iv_rmse: tuple
    spot_sup: tuple
    iv_slope: float
    spot_slope: float
    summaries: tuple


def run_rate_regression(cfg: ExperimentConfig, n_list) -> RateReport:
    """log RMSE vs log n regression for the IV estimator and the spot curve."""
    ns = sorted(set(int(n) for n in n_list))
    if len(ns) < 4:
        raise ValueError("need at least 4 distinct n values")
    rmses, sups, summaries = [], [], []
    for n in ns:
        report = run_iv_mc(replace(cfg, n=n))
        rmses.append(report.summary["rmse_iv"])
        sups.append(report.summary["mean_spot_sup_error"])
        summaries.append(report.summary)
    ln = np.log(ns)
    iv_slope = float(np.polyfit(ln, np.log(rmses), 1)[0])
    spot_slope = float(np.polyfit(ln, np.log(sups), 1)[0])
    return RateReport(
        n_values=tuple(ns), iv_rmse=tuple(rmses), spot_sup=tuple(sups),
        iv_slope=iv_slope, spot_slope=spot_slope, summaries=tuple(summaries),
    )
