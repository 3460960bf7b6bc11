"""Folding 1D sequences into per-period 2D tensors and back.

Rows traverse consecutive periods (inter-period axis), columns traverse
positions within one period (intra-period axis); memory order is row-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Folded2D:
    """A (folds, period, d) tensor plus the length it was folded from."""

    tensor: np.ndarray
    original_len: int
    period: int
    folds: int

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        object.__setattr__(self, "tensor", t)
        if t.ndim != 3 or t.shape[0] != self.folds or t.shape[1] != self.period:
            raise ValueError(
                f"tensor shape {t.shape} does not match folds={self.folds}, "
                f"period={self.period}"
            )
        padded = self.folds * self.period
        if padded < self.original_len or padded - self.original_len >= self.period:
            raise ValueError(
                f"folds*period={padded} inconsistent with original_len="
                f"{self.original_len}"
            )


def pad_to_multiple(X, period: int):
    """Append zero rows until the length is a multiple of ``period``.

    Returns (padded, original_len).
    """
    X = np.asarray(X, dtype=float)
    if period < 1:
        raise ValueError("period must be >= 1")
    T = X.shape[0]
    target = -(-T // period) * period
    if target == T:
        return X, T
    pad = np.zeros((target - T,) + X.shape[1:])
    return np.concatenate([X, pad], axis=0), T


def fold(X_padded, period: int, folds: int, original_len: int | None = None) -> Folded2D:
    """Reshape a (folds*period, d) sequence so each row holds one full period."""
    X = np.asarray(X_padded, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a (T, d) matrix")
    if X.shape[0] != folds * period:
        raise ValueError(
            f"shape mismatch: {X.shape[0]} rows != folds*period = {folds * period}"
        )
    if original_len is None:
        original_len = X.shape[0]
    return Folded2D(
        tensor=X.reshape(folds, period, X.shape[1]),
        original_len=original_len,
        period=period,
        folds=folds,
    )


def unfold_trunc(folded: Folded2D) -> np.ndarray:
    """Row-major flatten back to 1D-time, truncated to the original length."""
    t = folded.tensor
    return t.reshape(folded.folds * folded.period, t.shape[2])[: folded.original_len]
