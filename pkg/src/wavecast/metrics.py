"""Forecast error metrics: MAE, MSE, RMSE, MAPE with a zero-denominator guard."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAPE_GUARD = 1e-8


@dataclass(frozen=True)
class MetricReport:
    """The four error metrics over one series; mape is NaN when every term
    was skipped by the near-zero-observation guard."""

    mae: float
    mse: float
    rmse: float
    mape: float
    mape_skipped: int
    n_points: int

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        for v in (self.mae, self.mse, self.rmse):
            if not math.isfinite(v):
                raise ValueError("metrics must be finite")
        if abs(self.rmse**2 - self.mse) > 1e-9 * max(1.0, self.mse):
            raise ValueError("rmse must be the square root of mse")


def compute_metrics(observed, predicted) -> MetricReport:
    obs = np.asarray(observed, dtype=float).ravel()
    pred = np.asarray(predicted, dtype=float).ravel()
    if obs.size != pred.size:
        raise ValueError(f"length mismatch: {obs.size} != {pred.size}")
    if obs.size == 0:
        raise ValueError("empty input")
    err = pred - obs
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err * err))
    valid = np.abs(obs) >= MAPE_GUARD
    skipped = int(obs.size - valid.sum())
    if valid.any():
        mape = float(np.mean(np.abs(err[valid]) / np.abs(obs[valid])) * 100.0)
    else:
        mape = float("nan")
    return MetricReport(
        mae=mae,
        mse=mse,
        rmse=math.sqrt(mse),
        mape=mape,
        mape_skipped=skipped,
        n_points=int(obs.size),
    )


@dataclass(frozen=True)
class MetricAverages:
    """Equal-weight across-channel averages (rmse averaged directly, so the
    rmse^2 == mse identity intentionally does not apply here)."""

    mae: float
    mse: float
    rmse: float
    mape: float
    mape_skipped: int
    n_points: int


def average_metrics(reports) -> MetricAverages:
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to average")
    mapes = [r.mape for r in reports if not math.isnan(r.mape)]
    return MetricAverages(
        mae=float(np.mean([r.mae for r in reports])),
        mse=float(np.mean([r.mse for r in reports])),
        rmse=float(np.mean([r.rmse for r in reports])),
        mape=float(np.mean(mapes)) if mapes else float("nan"),
        mape_skipped=sum(r.mape_skipped for r in reports),
        n_points=sum(r.n_points for r in reports),
    )


def metrics_to_csv(channel_names, reports) -> str:
    """One row per channel plus an ``avg`` row."""
    lines = ["channel,mae,mse,rmse,mape,mape_skipped,n_points"]
    for name, r in zip(channel_names, reports):
        lines.append(
            f"{name},{r.mae!r},{r.mse!r},{r.rmse!r},{r.mape!r},"
            f"{r.mape_skipped},{r.n_points}"
        )
    avg = average_metrics(reports)
    lines.append(
        f"avg,{avg.mae!r},{avg.mse!r},{avg.rmse!r},{avg.mape!r},"
        f"{avg.mape_skipped},{avg.n_points}"
    )
    return "\n".join(lines) + "\n"
