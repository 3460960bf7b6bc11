"""Sliding-window training, recursive multi-step forecasting, evaluation.

Training minimizes the one-step mean squared error with adaptive-moment
updates; multi-step forecasts feed each one-step output back as the newest
input row. Evaluation pools errors over rollout origins and reports the
four metrics per channel in original units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ChannelStats, TimeSeriesFrame
from .metrics import MetricAverages, average_metrics, compute_metrics
from .network import Network, backward, forward

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    horizon: int = 10
    window_len: int = 64
    seed: int = 0
    patience: int = 10

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.window_len < 8:
            raise ValueError("window_len must be >= 8")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class ForecastResult:
    predictions: np.ndarray
    origin_index: int

    def __post_init__(self):
        preds = np.asarray(self.predictions, dtype=float)
        if preds.ndim != 2:
            raise ValueError("predictions must be a (horizon, N) matrix")
        if not np.isfinite(preds).all():
            raise ValueError("predictions must be finite")
        object.__setattr__(self, "predictions", preds)


def make_windows(frame, window_len: int, stride: int = 1):
    """(window, next-row target) pairs sliding over a frame or value matrix."""
    values = frame.values if isinstance(frame, TimeSeriesFrame) else np.asarray(frame, dtype=float)
    T = values.shape[0]
    if T <= window_len:
        raise ValueError(f"frame too short: {T} rows <= window_len {window_len}")
    pairs = []
    for i in range(0, T - window_len, stride):
        pairs.append((values[i:i + window_len], values[i + window_len]))
    return pairs


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


def _mean_onestep_loss(net: Network, pairs) -> float:
    total = 0.0
    for window, target in pairs:
        ypred = forward(net, window)
        err = ypred - target
        total += float(np.mean(err * err))
    return total / len(pairs)


def train(net: Network, train_frame: TimeSeriesFrame, val_frame: TimeSeriesFrame,
          cfg: TrainConfig):
    """Mini-batch Adam on one-step targets; returns (net, history) with the
    parameters of the best validation epoch restored."""
    train_pairs = make_windows(train_frame, cfg.window_len)
    val_pairs = make_windows(val_frame, cfg.window_len)
    if not val_pairs:
        raise ValueError("empty validation set")
    rng = np.random.default_rng(cfg.seed)
    m = {k: np.zeros_like(v) for k, v in net.params.items()}
    v = {k: np.zeros_like(p) for k, p in net.params.items()}
    step = 0
    history = []
    best_val = np.inf
    best_params = net.copy_params()
    since_best = 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_pairs))
        epoch_loss = 0.0
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo:lo + cfg.batch_size]
            net.zero_grads()
            batch_loss = 0.0
            for idx in batch:
                window, target = train_pairs[idx]
                batch_loss += backward(net, window, target)
            epoch_loss += batch_loss
            scale = 1.0 / len(batch)
            step += 1
            bc1 = 1.0 - ADAM_BETA1**step
            bc2 = 1.0 - ADAM_BETA2**step
            for name, p in net.params.items():
                g = net.grads[name] * scale
                m[name] = ADAM_BETA1 * m[name] + (1 - ADAM_BETA1) * g
                v[name] = ADAM_BETA2 * v[name] + (1 - ADAM_BETA2) * g * g
                p -= cfg.learning_rate * (m[name] / bc1) / (
                    np.sqrt(v[name] / bc2) + ADAM_EPS
                )
        train_loss = epoch_loss / len(train_pairs)
        val_loss = _mean_onestep_loss(net, val_pairs)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise RuntimeError(f"diverged at epoch {epoch}")
        history.append(EpochRecord(epoch=epoch, train_loss=train_loss, val_loss=val_loss))
        if val_loss < best_val:
            best_val = val_loss
            best_params = net.copy_params()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break
    net.load_params(best_params)
    return net, history


def history_to_csv(history) -> str:
    lines = ["epoch,train_loss,val_loss"]
    for rec in history:
        lines.append(f"{rec.epoch},{rec.train_loss!r},{rec.val_loss!r}")
    return "\n".join(lines) + "\n"


def forecast_recursive(net: Network, window, horizon: int,
                       origin_index: int | None = None) -> ForecastResult:
    """Roll the one-step head forward: each prediction becomes the newest row."""
    window = np.array(window, dtype=float)
    if origin_index is None:
        origin_index = window.shape[0] - 1
    preds = np.empty((horizon, window.shape[1]))
    for g in range(horizon):
        y = forward(net, window)
        if not np.isfinite(y).all():
            raise RuntimeError(f"non-finite prediction at step {g + 1}")
        preds[g] = y
        window[:-1] = window[1:]
        window[-1] = y
    return ForecastResult(predictions=preds, origin_index=origin_index)


def persistence_forecast(window, horizon: int,
                         origin_index: int | None = None) -> ForecastResult:
    """Repeat the last observed row; the minimal-skill reference."""
    window = np.asarray(window, dtype=float)
    if window.shape[0] < 1:
        raise ValueError("window is empty")
    if origin_index is None:
        origin_index = window.shape[0] - 1
    preds = np.tile(window[-1], (horizon, 1))
    return ForecastResult(predictions=preds, origin_index=origin_index)


@dataclass(frozen=True)
class EvaluationReport:
    horizon: int
    channel_names: tuple
    per_channel: tuple
    averages: MetricAverages
    n_origins: int


def evaluate(net: Network | None, frame: TimeSeriesFrame, horizon: int,
             window_len: int, stats: ChannelStats | None = None,
             origin_stride: int = 1) -> EvaluationReport:
    """Slide rollout origins over ``frame`` (original units), forecast
    ``horizon`` steps at each, and pool errors per channel.

    ``net=None`` evaluates the persistence baseline. ``stats`` are the
    training-split statistics used to standardize model inputs and restore
    outputs to original units.
    """
    values = frame.values
    T, N = values.shape
    last_origin = T - window_len - horizon
    if last_origin < 0:
        raise ValueError("test split too short for one window plus horizon")
    observed_all = []
    predicted_all = []
    for i in range(0, last_origin + 1, origin_stride):
        window = values[i:i + window_len]
        if net is None:
            preds = persistence_forecast(window, horizon).predictions
        else:
            std_window = stats.apply(window) if stats is not None else window
            rolled = forecast_recursive(net, std_window, horizon,
                                        origin_index=i + window_len - 1)
            preds = stats.invert(rolled.predictions) if stats is not None else rolled.predictions
        observed_all.append(values[i + window_len:i + window_len + horizon])
        predicted_all.append(preds)
    observed = np.concatenate(observed_all, axis=0)
    predicted = np.concatenate(predicted_all, axis=0)
    reports = tuple(
        compute_metrics(observed[:, ch], predicted[:, ch]) for ch in range(N)
    )
    return EvaluationReport(
        horizon=horizon,
        channel_names=frame.channel_names,
        per_channel=reports,
        averages=average_metrics(reports),
        n_origins=len(observed_all),
    )
