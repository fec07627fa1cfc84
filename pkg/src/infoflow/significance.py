"""Uncertainty for flow estimates: asymptotic standard errors and surrogates.

The asymptotic route takes the coefficient variance from the inverse
observed information of the linear-Gaussian fit (equivalently the classical
least-squares variance with the maximum-likelihood residual variance) and
scales it by the fixed factor |C_ij / C_ii|; the sampling variability of
that factor is second order and deliberately ignored. The surrogate route
re-estimates the flow against resampled source series that preserve the
source's autocorrelation, so it tests cross-coupling specifically.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariance import CovarianceSet
from .errors import (
    DegenerateInferenceWarning,
    InsufficientDataError,
    ResolutionError,
    SingularCovarianceError,
    UsageError,
)
from .estimator import (
    FlowEstimate,
    LinearModelFit,
    SelfInfluenceEstimate,
    estimate_flow,
)
from .panel import TimeSeriesPanel

# Lag-1 residual autocorrelation above this is flagged in reports: the
# plain delta-method errors assume serially uncorrelated residuals.
SERIAL_CORRELATION_LIMIT = 0.2

MIN_SURROGATES = 19

SURROGATE_METHODS = ("circular_shift", "permutation")


@dataclass(frozen=True)
class SignificanceReport:
    """Uncertainty attached to one estimate; fields absent until computed."""

    stderr: float | None = None
    z_score: float | None = None
    p_asymptotic: float | None = None
    p_surrogate: float | None = None
    n_surrogates: int = 0
    alpha: float | None = None
    lag1_residual_autocorr: float | None = None

    @property
    def serial_correlation_flag(self) -> bool:
        r = self.lag1_residual_autocorr
        return r is not None and abs(r) > SERIAL_CORRELATION_LIMIT


def two_sided_p(z: float) -> float:
    """Two-sided standard-normal tail probability."""
    return math.erfc(abs(z) / math.sqrt(2.0))


def _lag1_autocorr(residuals: np.ndarray) -> float:
    e = residuals - residuals.mean()
    denom = float(e @ e)
    if denom == 0.0:
        return 0.0
    return float(e[:-1] @ e[1:] / denom)


def _coefficient_variance(fit: LinearModelFit, cov: CovarianceSet, index: int) -> float:
    """Sampling variance of fitted coefficient ``index``.

    Inverse-information form: residual_variance * [Cinv]_jj / (n_eff - 1),
    with [Cinv]_jj read off the cofactors already at hand.
    """
    if cov.near_singular:
        raise SingularCovarianceError("cannot attach significance to a singular fit")
    if fit.n_eff <= cov.d + 2:
        raise InsufficientDataError(
            f"need n_eff > d + 2 for asymptotic inference (n_eff={fit.n_eff}, d={cov.d})"
        )
    inv_jj = cov.cofactors[index, index] / cov.det
    return max(fit.residual_variance * inv_jj / (fit.n_eff - 1), 0.0)


def _z_and_p(value: float, stderr: float, residual_variance: float) -> tuple[float, float]:
    if residual_variance == 0.0:
        warnings.warn(
            "perfect fit: zero residual variance collapses the standard error",
            DegenerateInferenceWarning,
            stacklevel=3,
        )
        return (0.0, 1.0) if value == 0.0 else (math.inf, 0.0)
    if stderr == 0.0:
        # the |C_ij / C_ii| factor vanished, which forces value == 0 as well
        return 0.0, 1.0
    z = value / stderr
    return z, two_sided_p(z)


def asymptotic_significance(
    fit: LinearModelFit,
    cov: CovarianceSet,
    flow: FlowEstimate,
) -> SignificanceReport:
    """Delta-method standard error and two-sided p value for a flow estimate.

    stderr(T) = |C_ij / C_ii| * stderr(coefficient j of the target fit).
    """
    if fit.target != flow.target:
        raise UsageError("fit and flow describe different targets")
    i, j = flow.target, flow.source
    var_a = _coefficient_variance(fit, cov, j)
    ratio = abs(cov.matrix[i, j] / cov.matrix[i, i])
    stderr = ratio * math.sqrt(var_a)
    z, p = _z_and_p(flow.value, stderr, fit.residual_variance)
    return SignificanceReport(
        stderr=stderr,
        z_score=z,
        p_asymptotic=p,
        lag1_residual_autocorr=_lag1_autocorr(fit.residuals),
    )


def self_influence_significance(
    fit: LinearModelFit,
    cov: CovarianceSet,
    estimate: SelfInfluenceEstimate,
) -> SignificanceReport:
    """Same delta-method machinery applied to the self-influence estimate."""
    if fit.target != estimate.target:
        raise UsageError("fit and estimate describe different targets")
    stderr = math.sqrt(_coefficient_variance(fit, cov, estimate.target))
    z, p = _z_and_p(estimate.value, stderr, fit.residual_variance)
    return SignificanceReport(
        stderr=stderr,
        z_score=z,
        p_asymptotic=p,
        lag1_residual_autocorr=_lag1_autocorr(fit.residuals),
    )


def _surrogate_series(row: np.ndarray, rng: np.random.Generator, method: str) -> np.ndarray:
    n = len(row)
    if method == "circular_shift":
        # Rotation at least n/10 positions away from either identity.
        lo = max(1, math.ceil(n / 10))
        shift = int(rng.integers(lo, n - lo, endpoint=True))
        return np.roll(row, shift)
    if method == "permutation":
        return rng.permutation(row)
    raise UsageError(f"unknown surrogate method {method!r}; choose from {SURROGATE_METHODS}")


def surrogate_flow_samples(
    panel: TimeSeriesPanel,
    source: int,
    target: int,
    k: int = 1,
    *,
    n_surrogates: int,
    seed=None,
    method: str = "circular_shift",
    jobs: int = 1,
) -> np.ndarray:
    """Flow re-estimates against ``n_surrogates`` resampled source series.

    Each surrogate draws from its own seed-derived substream, so the result
    is independent of execution order and of ``jobs``. A surrogate that
    happens to make the covariance singular contributes +inf (counts as
    extreme, which can only make the p value more conservative).
    """
    if method not in SURROGATE_METHODS:
        raise UsageError(f"unknown surrogate method {method!r}; choose from {SURROGATE_METHODS}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(n_surrogates)
    row = panel.values[source]

    def one(child) -> float:
        rng = np.random.Generator(np.random.PCG64(child))
        surr = _surrogate_series(row, rng, method)
        try:
            return estimate_flow(panel.with_series(source, surr), source, target, k).value
        except SingularCovarianceError:
            return math.inf

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(one, children))
    else:
        values = [one(child) for child in children]
    return np.asarray(values)


def surrogate_significance(
    panel: TimeSeriesPanel,
    source: int,
    target: int,
    k: int = 1,
    *,
    n_surrogates: int = 199,
    seed=None,
    method: str = "circular_shift",
    jobs: int = 1,
) -> SignificanceReport:
    """Nonparametric p value from source-resampling surrogates.

    p = (1 + #{|T_surr| >= |T|}) / (n_surrogates + 1), so the attainable
    resolution is exactly 1/(n_surrogates + 1).
    """
    if n_surrogates < MIN_SURROGATES:
        raise ResolutionError(
            f"need at least {MIN_SURROGATES} surrogates for a usable p value,"
            f" got {n_surrogates}"
        )
    observed = estimate_flow(panel, source, target, k).value
    samples = surrogate_flow_samples(
        panel,
        source,
        target,
        k,
        n_surrogates=n_surrogates,
        seed=seed,
        method=method,
        jobs=jobs,
    )
    exceed = int(np.sum(np.abs(samples) >= abs(observed)))
    p = (1 + exceed) / (n_surrogates + 1)
    return SignificanceReport(p_surrogate=p, n_surrogates=int(n_surrogates))
