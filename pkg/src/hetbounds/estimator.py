"""Weighted least-squares machinery for short and supershort regressions.

Fits are solved through a pivoted QR decomposition on the weighted, column-
scaled design rather than the normal equations, which keeps wide indicator
designs well conditioned.  Rank deficiency is a hard error that names the
offending columns; silently dropping a collinear column would change the
short-regression estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import scipy.linalg

from .bounds import BiasBound

RANK_TOL = 1e-10


class EstimationError(ValueError):
    pass


class RankDeficiencyError(EstimationError):
    def __init__(self, columns: list[str]):
        self.columns = columns
        super().__init__(f"design matrix is rank deficient; offending columns: {columns}")


@dataclass(frozen=True)
class Dataset:
    """A tabular dataset with optional nonnegative per-row weights."""

    frame: pd.DataFrame
    weight_column: Optional[str] = None

    def __post_init__(self):
        if len(self.frame) < 1:
            raise EstimationError("dataset must contain at least one row")
        if self.weight_column is not None:
            self._validate_weights(self.frame[self.weight_column].to_numpy(dtype=float))

    @staticmethod
    def _validate_weights(w: np.ndarray):
        if not np.all(np.isfinite(w)):
            raise EstimationError("weights must be finite")
        if np.any(w < 0):
            raise EstimationError("weights must be nonnegative")
        if not np.any(w > 0):
            raise EstimationError("weights must not be all zero")

    def weights_for(self, index: pd.Index) -> np.ndarray:
        if self.weight_column is None:
            return np.ones(len(index))
        w = self.frame.loc[index, self.weight_column].to_numpy(dtype=float)
        self._validate_weights(w)
        return w


@dataclass(frozen=True)
class RegressionSpec:
    outcome: str
    treatment: str
    controls_core: tuple[str, ...] = ()
    controls_bench: tuple[str, ...] = ()
    weight_column: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "controls_core", tuple(self.controls_core))
        object.__setattr__(self, "controls_bench", tuple(self.controls_bench))
        names = [self.outcome, self.treatment, *self.controls_core, *self.controls_bench]
        if len(set(names)) != len(names):
            raise EstimationError(f"regression columns must be pairwise distinct: {names}")

    @property
    def controls(self) -> tuple[str, ...]:
        return self.controls_core + self.controls_bench


@dataclass(frozen=True)
class FitResult:
    coefficients: dict[str, float]
    residual_variance: float
    n_effective: float
    treatment_coefficient: float
    design_rank: int
    n_dropped_missing: int = 0


@dataclass(frozen=True)
class SupershortResult:
    setting: str
    theta_s: float
    theta_ss: float
    b_ss: float


def _is_categorical(series: pd.Series) -> bool:
    return series.dtype == object or isinstance(series.dtype, pd.CategoricalDtype)


def expand_design(frame: pd.DataFrame, columns: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    """Expand columns into a numeric design block; categoricals become
    indicator contrasts with the first sorted level as reference."""
    blocks, names = [], []
    for col in columns:
        series = frame[col]
        if _is_categorical(series):
            levels = sorted(series.astype(str).unique())
            for level in levels[1:]:
                blocks.append((series.astype(str) == level).to_numpy(dtype=float))
                names.append(f"{col}[{level}]")
        else:
            values = series.to_numpy(dtype=float)
            blocks.append(values)
            names.append(col)
    if not blocks:
        return np.empty((len(frame), 0)), []
    return np.column_stack(blocks), names


def _used_columns(data: Dataset, spec: RegressionSpec, controls: Sequence[str]) -> list[str]:
    cols = [spec.outcome, spec.treatment, *controls]
    weight_col = spec.weight_column or data.weight_column
    if weight_col is not None:
        cols.append(weight_col)
    missing = [c for c in cols if c not in data.frame.columns]
    if missing:
        raise EstimationError(f"columns not found in dataset: {missing}")
    return cols


def _prepare(data: Dataset, spec: RegressionSpec, controls: Sequence[str]):
    cols = _used_columns(data, spec, controls)
    sub = data.frame[cols]
    kept = sub.dropna()
    n_dropped = len(sub) - len(kept)
    if len(kept) == 0:
        raise EstimationError("no rows remain after dropping missing values")
    weight_col = spec.weight_column or data.weight_column
    if weight_col is not None:
        w = kept[weight_col].to_numpy(dtype=float)
        Dataset._validate_weights(w)
    else:
        w = np.ones(len(kept))
    y = kept[spec.outcome].to_numpy(dtype=float)
    x_block, x_names = expand_design(kept, [spec.treatment, *controls])
    design = np.column_stack([np.ones(len(kept)), x_block])
    names = ["(intercept)", *x_names]
    for name, column in zip(names[1:], design.T[1:]):
        if not np.all(np.isfinite(column)):
            raise EstimationError(f"non-finite values in column {name!r}")
    if not np.all(np.isfinite(y)):
        raise EstimationError(f"non-finite values in column {spec.outcome!r}")
    return y, design, names, w, n_dropped


def _wls_solve(y: np.ndarray, design: np.ndarray, names: list[str], w: np.ndarray):
    """Weighted QR solve with column scaling; raises on rank deficiency."""
    n, p = design.shape
    if n <= p:
        raise EstimationError(f"need more rows ({n}) than design columns ({p})")
    sw = np.sqrt(w)
    xw = design * sw[:, None]
    yw = y * sw
    scale = np.linalg.norm(xw, axis=0)
    scale[scale == 0.0] = 1.0
    xs = xw / scale
    q, r, piv = scipy.linalg.qr(xs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_TOL * diag.max())) if diag.size else 0
    if rank < p:
        offenders = [names[piv[i]] for i in range(rank, p)]
        raise RankDeficiencyError(offenders)
    beta_s = scipy.linalg.solve_triangular(r, q.T @ yw)
    beta = np.empty(p)
    beta[piv] = beta_s
    beta = beta / scale
    resid = y - design @ beta
    return beta, resid, rank


def wols_fit(data: Dataset, spec: RegressionSpec) -> FitResult:
    """Fit outcome on intercept + treatment + controls by weighted least squares."""
    y, design, names, w, n_dropped = _prepare(data, spec, spec.controls)
    beta, resid, rank = _wls_solve(y, design, names, w)
    wsum = w.sum()
    dof = len(y) - rank
    residual_variance = float((w * resid**2).sum() / wsum * len(y) / dof) if dof > 0 else 0.0
    coefficients = dict(zip(names, beta.tolist()))
    return FitResult(
        coefficients=coefficients,
        residual_variance=residual_variance,
        n_effective=float(wsum**2 / (w**2).sum()),
        treatment_coefficient=coefficients[spec.treatment],
        design_rank=rank,
        n_dropped_missing=n_dropped,
    )


def residualize(
    data: Dataset,
    target: str,
    controls: Sequence[str],
    weight_column: Optional[str] = None,
) -> np.ndarray:
    """Residuals of target after its WLS projection onto intercept + controls."""
    weight_col = weight_column or data.weight_column
    cols = [target, *controls] + ([weight_col] if weight_col else [])
    missing = [c for c in cols if c not in data.frame.columns]
    if missing:
        raise EstimationError(f"columns not found in dataset: {missing}")
    kept = data.frame[cols].dropna()
    if len(kept) == 0:
        raise EstimationError("no rows remain after dropping missing values")
    w = kept[weight_col].to_numpy(dtype=float) if weight_col else np.ones(len(kept))
    y = kept[target].to_numpy(dtype=float)
    x_block, x_names = expand_design(kept, list(controls))
    design = np.column_stack([np.ones(len(kept)), x_block])
    names = ["(intercept)", *x_names]
    beta, resid, _ = _wls_solve(y, design, names, w)
    return resid


def short_supershort(data: Dataset, spec: RegressionSpec, setting: str = "") -> SupershortResult:
    """Short regression (all controls) versus supershort (core controls only);
    the shift in the treatment coefficient is the observed-bias change."""
    if not spec.controls_bench:
        raise EstimationError("supershort comparison requires a non-empty benchmark partition")
    fit_short = wols_fit(data, spec)
    spec_ss = RegressionSpec(
        outcome=spec.outcome,
        treatment=spec.treatment,
        controls_core=spec.controls_core,
        controls_bench=(),
        weight_column=spec.weight_column,
    )
    fit_ss = wols_fit(data, spec_ss)
    theta_s = fit_short.treatment_coefficient
    theta_ss = fit_ss.treatment_coefficient
    return SupershortResult(setting=setting, theta_s=theta_s, theta_ss=theta_ss, b_ss=theta_s - theta_ss)


def partial_r2_bias_bound(
    r2_d: float,
    r2_y: float,
    sd_y_resid: float,
    sd_d_resid: float,
    strength_multiplier: float = 1.0,
) -> BiasBound:
    """Symmetric bias bound from partial-R2 strength of a hypothetical
    confounder, scaled by a benchmark strength multiplier."""
    if not 0.0 <= r2_d < 1.0:
        raise EstimationError(f"r2_d must be in [0, 1), got {r2_d}")
    if not 0.0 <= r2_y <= 1.0:
        raise EstimationError(f"r2_y must be in [0, 1], got {r2_y}")
    if sd_y_resid <= 0 or sd_d_resid <= 0:
        raise EstimationError("residual standard deviations must be positive")
    if strength_multiplier < 0:
        raise EstimationError("strength multiplier must be nonnegative")
    k = strength_multiplier
    if k * r2_d >= 1.0:
        raise EstimationError(
            f"k * r2_d = {k * r2_d} >= 1: the hypothesized confounder would fully determine treatment"
        )
    b = math.sqrt((k * r2_y) * (k * r2_d) / (1.0 - k * r2_d)) * (sd_y_resid / sd_d_resid)
    return BiasBound(-b, b)
