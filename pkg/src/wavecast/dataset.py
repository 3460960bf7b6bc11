"""Time series ingestion, preprocessing, splitting, and synthetic corpora.

CSV dialect: header row ``timestamp,<name>...``; timestamps are ISO-8601 or a
numeric sample index; missing values are empty fields or the literal ``NaN``.
Frames are immutable after construction (their arrays are read-only).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import datetime, timedelta

import numpy as np

from ._kernels import nlms_predict

CONTINUOUS_MISSING_FILL = 0.01


@dataclass(frozen=True)
class TimeSeriesFrame:
    """T x N sample matrix with an observed-value mask and sampling frequency."""

    values: np.ndarray
    mask: np.ndarray
    sample_freq: float
    channel_names: tuple
    start_time: str | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("values must be a T x N matrix with T, N >= 1")
        if mask.shape != values.shape:
            raise ValueError("mask shape must match values shape")
        if not self.sample_freq > 0:
            raise ValueError("sample_freq must be positive")
        names = tuple(self.channel_names)
        if len(names) != values.shape[1]:
            raise ValueError("channel_names length must equal N")
        values.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "channel_names", names)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def with_values(self, values, mask=None) -> "TimeSeriesFrame":
        if mask is None:
            mask = np.ones_like(np.asarray(values, dtype=float), dtype=bool)
        return replace(self, values=values, mask=mask)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a deterministic multi-period synthetic corpus."""

    length: int
    periods: tuple
    amplitudes: tuple
    noise_std: float = 0.0
    channels: int = 1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(self.periods))
        object.__setattr__(self, "amplitudes", tuple(self.amplitudes))
        if len(self.periods) != len(self.amplitudes):
            raise ValueError("length mismatch: periods and amplitudes")
        if len(self.periods) < 1:
            raise ValueError("need at least one period")
        if any(p < 2 for p in self.periods):
            raise ValueError("every period must be >= 2 samples")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.length < 1 or self.channels < 1:
            raise ValueError("length and channels must be >= 1")


@dataclass(frozen=True)
class SplitRatios:
    """Chronological train/test/val fractions; must sum to 1."""

    train: float = 0.7
    test: float = 0.2
    val: float = 0.1

    def __post_init__(self):
        for part in (self.train, self.test, self.val):
            if not 0.0 < part < 1.0:
                raise ValueError("split fractions must lie in (0, 1)")
        if abs(self.train + self.test + self.val - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel mean/std fitted on a training split (population std)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be matching 1D arrays")
        if np.any(std <= 0):
            raise ValueError("degenerate channel: zero variance")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    def apply(self, values):
        return (np.asarray(values, dtype=float) - self.mean) / self.std

    def invert(self, values):
        return np.asarray(values, dtype=float) * self.std + self.mean


# ---------------------------------------------------------------------------
# CSV ingestion / persistence


def _parse_timestamp(text: str):
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text).timestamp()
    except ValueError:
        raise ValueError(f"unparseable timestamp {text!r}") from None


def load_csv(path, freq: float) -> TimeSeriesFrame:
    """Read a timestamped CSV into a frame; missing cells get mask=False."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("zero data rows: file is empty") from None
        if len(header) < 2:
            raise ValueError("need a timestamp column plus at least one channel")
        names = tuple(h.strip() for h in header[1:])
        rows, stamps, start = [], [], None
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"inconsistent column count at line {lineno}: "
                    f"{len(row)} != {len(header)}"
                )
            if start is None:
                start = row[0].strip()
            stamps.append(_parse_timestamp(row[0].strip()))
            rows.append([cell.strip() for cell in row[1:]])
    if not rows:
        raise ValueError("zero data rows")
    stamps = np.asarray(stamps)
    if np.any(np.diff(stamps) <= 0):
        raise ValueError("non-monotone timestamps")
    values = np.zeros((len(rows), len(names)))
    mask = np.ones_like(values, dtype=bool)
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            if cell == "":
                mask[i, j] = False
                values[i, j] = np.nan
                continue
            v = float(cell)
            if math.isnan(v):
                mask[i, j] = False
                values[i, j] = np.nan
            else:
                values[i, j] = v
    return TimeSeriesFrame(
        values=values, mask=mask, sample_freq=freq,
        channel_names=names, start_time=start,
    )


def _timestamp_column(frame: TimeSeriesFrame):
    T = frame.length
    start = frame.start_time
    if start is not None:
        try:
            t0 = float(start)
            return [repr(t0 + i / frame.sample_freq) for i in range(T)]
        except ValueError:
            pass
        try:
            dt0 = datetime.fromisoformat(start)
            step = timedelta(seconds=1.0 / frame.sample_freq)
            return [(dt0 + i * step).isoformat() for i in range(T)]
        except ValueError:
            pass
    return [str(i) for i in range(T)]


def save_csv(frame: TimeSeriesFrame, path) -> None:
    stamps = _timestamp_column(frame)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", *frame.channel_names])
        for i in range(frame.length):
            cells = [
                repr(float(frame.values[i, j])) if frame.mask[i, j] else ""
                for j in range(frame.channels)
            ]
            writer.writerow([stamps[i], *cells])


# ---------------------------------------------------------------------------
# preprocessing


def impute_missing(frame: TimeSeriesFrame) -> TimeSeriesFrame:
    """Fill missing points: isolated gaps get the neighbor mean, runs of two
    or more get the constant fill, one-sided boundary gaps copy the neighbor."""
    values = frame.values.copy()
    mask = frame.mask
    T = frame.length
    for ch in range(frame.channels):
        col_mask = mask[:, ch]
        if not col_mask.any():
            raise ValueError(
                f"channel unrecoverable: {frame.channel_names[ch]!r} fully missing"
            )
        if col_mask.all():
            continue
        col = values[:, ch]
        i = 0
        while i < T:
            if col_mask[i]:
                i += 1
                continue
            j = i
            while j < T and not col_mask[j]:
                j += 1
            run = j - i
            if run >= 2:
                col[i:j] = CONTINUOUS_MISSING_FILL
            else:
                left = col[i - 1] if i > 0 else None
                right = col[j] if j < T else None
                if left is not None and right is not None:
                    col[i] = 0.5 * (left + right)
                else:
                    col[i] = left if left is not None else right
            i = j
    return frame.with_values(values)


def denoise_adaptive(frame: TimeSeriesFrame, taps: int = 8, step: float = 0.5) -> TimeSeriesFrame:
    """Replace each channel by its normalized-LMS one-step prediction.

    The filter predicts x(t) from the previous ``taps`` samples; the first
    ``taps`` samples pass through unchanged.
    """
    if taps < 1:
        raise ValueError("taps must be >= 1")
    if not 0.0 < step < 2.0:
        raise ValueError("step must lie in (0, 2)")
    if not frame.mask.all() or not np.isfinite(frame.values).all():
        raise ValueError("preprocess order violation: impute before denoising")
    out = np.column_stack([
        nlms_predict(np.ascontiguousarray(frame.values[:, ch]), taps, step, 1e-12)
        for ch in range(frame.channels)
    ])
    return frame.with_values(out)


def split(frame: TimeSeriesFrame, ratios: SplitRatios):
    """Chronological train/test/val segments; remainder rows go to train."""
    T = frame.length
    if T < 10:
        raise ValueError("need at least 10 samples to split")
    n_test = int(T * ratios.test + 1e-9)
    n_val = int(T * ratios.val + 1e-9)
    n_train = T - n_test - n_val
    if min(n_train, n_test, n_val) == 0:
        raise ValueError("split produces an empty segment")

    def piece(lo, hi, start):
        return TimeSeriesFrame(
            values=frame.values[lo:hi].copy(),
            mask=frame.mask[lo:hi].copy(),
            sample_freq=frame.sample_freq,
            channel_names=frame.channel_names,
            start_time=start,
        )

    def shifted_start(offset):
        if frame.start_time is None or offset == 0:
            return frame.start_time
        try:
            return repr(float(frame.start_time) + offset / frame.sample_freq)
        except ValueError:
            pass
        try:
            dt0 = datetime.fromisoformat(frame.start_time)
            return (dt0 + timedelta(seconds=offset / frame.sample_freq)).isoformat()
        except ValueError:
            return None

    return (
        piece(0, n_train, frame.start_time),
        piece(n_train, n_train + n_test, shifted_start(n_train)),
        piece(n_train + n_test, T, shifted_start(n_train + n_test)),
    )


# ---------------------------------------------------------------------------
# synthetic corpora


def synth_multiperiod(spec: SynthSpec) -> TimeSeriesFrame:
    """Sum of sinusoids with evenly spaced per-channel phases plus seeded noise."""
    t = np.arange(spec.length)
    phases = 2.0 * np.pi * np.arange(spec.channels) / spec.channels
    values = np.zeros((spec.length, spec.channels))
    for period, amp in zip(spec.periods, spec.amplitudes):
        values += amp * np.sin(2.0 * np.pi * t[:, None] / period + phases[None, :])
    rng = np.random.default_rng(spec.seed)
    values += rng.normal(0.0, spec.noise_std, size=values.shape)
    names = tuple(f"ch{i + 1}" for i in range(spec.channels))
    return TimeSeriesFrame(
        values=values,
        mask=np.ones_like(values, dtype=bool),
        sample_freq=1.0,
        channel_names=names,
        start_time=None,
    )


def inject_local_periodicity(
    frame: TimeSeriesFrame, center: int, width: float, period: int, amp: float
) -> TimeSeriesFrame:
    """Add a Gaussian-windowed sinusoid to every channel."""
    if not 0 <= center < frame.length:
        raise ValueError("center must lie inside the frame")
    if width <= 0:
        raise ValueError("width must be positive")
    if period < 2:
        raise ValueError("period must be >= 2 samples")
    t = np.arange(frame.length, dtype=float)
    bump = amp * np.exp(-((t - center) ** 2) / (2.0 * width**2)) * np.sin(
        2.0 * np.pi * t / period
    )
    return frame.with_values(frame.values + bump[:, None], frame.mask.copy())


# ---------------------------------------------------------------------------
# standardization


def fit_stats(frame: TimeSeriesFrame) -> ChannelStats:
    mean = frame.values.mean(axis=0)
    std = frame.values.std(axis=0)
    if np.any(std == 0):
        bad = [frame.channel_names[i] for i in np.flatnonzero(std == 0)]
        raise ValueError(f"degenerate channel: zero variance in {bad}")
    return ChannelStats(mean=mean, std=std)


def standardize(frame: TimeSeriesFrame, stats: ChannelStats) -> TimeSeriesFrame:
    return frame.with_values(stats.apply(frame.values), frame.mask.copy())


def destandardize(frame: TimeSeriesFrame, stats: ChannelStats) -> TimeSeriesFrame:
    return frame.with_values(stats.invert(frame.values), frame.mask.copy())
