"""Dyadic period extraction from multi-level wavelet detail energies.

A signal is decomposed with an orthonormal two-channel filter bank under
periodic boundary handling; detail energies score each dyadic level, the
top-k levels are kept, and each level j maps to frequency F/2^j and period
2^j samples. An FFT-based selector with the same output shape is provided
for ablation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

# Orthonormal scaling (lowpass) filters, standard published coefficients.
# The highpass partner is the quadrature mirror h[k] = (-1)^k g[L-1-k].
BASIS_TABLE = {
    "haar": (
        0.70710678118654752,
        0.70710678118654752,
    ),
    "db2": (
        0.48296291314469025,
        0.83651630373746899,
        0.22414386804185735,
        -0.12940952255092145,
    ),
    "db4": (
        0.23037781330885523,
        0.71484657055254153,
        0.63088076792959036,
        -0.02798376941698385,
        -0.18703481171888114,
        0.03084138183598697,
        0.03288301166698295,
        -0.01059740178499728,
    ),
    "sym4": (
        0.03222310060404270,
        -0.01260396726203783,
        -0.09921954357684722,
        0.29785779560527736,
        0.80373875180591614,
        0.49761866763201545,
        -0.02963552764599851,
        -0.07576571478927333,
    ),
}

BASIS_NAMES = tuple(BASIS_TABLE)

MAX_LEVELS = 6


@dataclass(frozen=True)
class WaveletBasis:
    """Orthonormal lowpass/highpass filter pair."""

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.lowpass, dtype=float)
        h = np.asarray(self.highpass, dtype=float)
        object.__setattr__(self, "lowpass", g)
        object.__setattr__(self, "highpass", h)
        if g.ndim != 1 or g.shape != h.shape:
            raise ValueError("lowpass/highpass tap lists must have equal length")
        L = g.shape[0]
        if L < 2 or L % 2 != 0:
            raise ValueError("tap lists must have even length >= 2")
        energy = float(np.sum(g * g) + np.sum(h * h))
        if abs(energy - 2.0) > 1e-9:
            raise ValueError(f"filters are not an orthonormal pair (energy {energy})")
        mirror = np.array([(-1) ** k * g[L - 1 - k] for k in range(L)])
        if np.max(np.abs(h - mirror)) > 1e-9:
            raise ValueError("highpass is not the quadrature mirror of lowpass")


def get_basis(name: str) -> WaveletBasis:
    if name not in BASIS_TABLE:
        raise ValueError(f"unknown wavelet basis {name!r}; choose from {BASIS_NAMES}")
    g = np.array(BASIS_TABLE[name], dtype=float)
    L = g.shape[0]
    h = np.array([(-1) ** k * g[L - 1 - k] for k in range(L)])
    return WaveletBasis(name=name, lowpass=g, highpass=h)


@dataclass
class WaveletDecomposition:
    """Detail coefficients per level plus the final approximation."""

    details: list
    approx: np.ndarray
    levels: int

    def __post_init__(self):
        if self.levels < 1 or len(self.details) != self.levels:
            raise ValueError("levels must be >= 1 and match the detail list")


def dwt_level(signal, basis: WaveletBasis):
    """One analysis level: returns (detail, approx), each half the input length.

    Output index i correlates the taps with the signal starting at sample 2i,
    with circular wraparound (periodic boundary).
    """
    x = np.ascontiguousarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if x.shape[0] % 2 != 0 or x.shape[0] < 2:
        raise ValueError(f"odd-length input (length {x.shape[0]})")
    return _kernels.dwt_level_pair(x, basis.lowpass, basis.highpass)


def dwt_multilevel(signal, basis: WaveletBasis, levels: int) -> WaveletDecomposition:
    x = np.asarray(signal, dtype=float)
    T = x.shape[0]
    if levels < 1 or levels > int(math.log2(T)):
        raise ValueError(f"J out of range: {levels} for length {T}")
    details = []
    approx = x
    for _ in range(levels):
        d, approx = dwt_level(approx, basis)
        details.append(d)
    return WaveletDecomposition(details=details, approx=approx, levels=levels)


def level_amplitudes(decomps) -> np.ndarray:
    """Energy of the across-series mean detail at each level."""
    if not decomps:
        raise ValueError("need at least one decomposition")
    J = decomps[0].levels
    for dec in decomps:
        if dec.levels != J:
            raise ValueError("mismatched shapes: decompositions differ in levels")
    xi = np.empty(J)
    for j in range(J):
        ref = decomps[0].details[j].shape
        for dec in decomps:
            if dec.details[j].shape != ref:
                raise ValueError(f"mismatched shapes at level {j + 1}")
        mean = np.mean([dec.details[j] for dec in decomps], axis=0)
        xi[j] = float(np.dot(mean, mean))
    return xi


def select_topk(xi, k: int):
    """Top-k levels by amplitude; ties go to the smaller level index.

    Returns (levels, amplitudes) with levels 1-based, ordered by descending
    amplitude. When fewer levels than k exist, all are returned.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.size == 0:
        raise ValueError("amplitude array is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    order = np.argsort(-xi, kind="stable")[: min(k, xi.size)]
    return order + 1, xi[order]


@dataclass(frozen=True)
class PeriodEntry:
    level: int
    freq_hz: float
    period: int
    folds: int
    amplitude: float


@dataclass(frozen=True)
class PeriodSet:
    """Selected (level, frequency, period, folds, amplitude) tuples."""

    entries: tuple

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValueError("a period set needs at least one entry")
        amps = [e.amplitude for e in self.entries]
        if any(a < 0 for a in amps):
            raise ValueError("amplitudes must be >= 0")
        if any(amps[i] < amps[i + 1] for i in range(len(amps) - 1)):
            raise ValueError("entries must be sorted by descending amplitude")
        if any(e.period < 1 or e.folds < 1 for e in self.entries):
            raise ValueError("periods and fold counts must be >= 1")

    def __len__(self):
        return len(self.entries)

    @property
    def periods(self):
        return np.array([e.period for e in self.entries], dtype=int)

    @property
    def frequencies(self):
        return np.array([e.freq_hz for e in self.entries])

    @property
    def amplitudes(self):
        return np.array([e.amplitude for e in self.entries])


def levels_to_periods(levels, amplitudes, sample_freq: float, length: int) -> PeriodSet:
    """Map dyadic levels to (frequency, period, folds) for a given window."""
    levels = np.asarray(levels, dtype=int)
    if levels.size == 0:
        raise ValueError("no levels selected")
    if sample_freq <= 0:
        raise ValueError("sample_freq must be positive")
    entries = []
    for j, amp in zip(levels, np.asarray(amplitudes, dtype=float)):
        period = 1 << int(j)
        if period >= length:
            raise ValueError(
                f"period exceeds window: level {j} gives {period} >= {length}"
            )
        entries.append(
            PeriodEntry(
                level=int(j),
                freq_hz=sample_freq / period,
                period=period,
                folds=-(-length // period),
                amplitude=float(amp),
            )
        )
    return PeriodSet(entries=tuple(entries))


def _as_columns(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("input must be a (T, d) matrix or 1D sequence")
    return X


def _column_mean_detail_energies(X, basis: WaveletBasis, J: int) -> np.ndarray:
    """Same numbers as dwt_multilevel per column + level_amplitudes, fused so
    each level is one kernel call over all columns."""
    approx = np.ascontiguousarray(X)
    xi = np.empty(J)
    for j in range(J):
        detail, approx = _kernels.dwt_level_multi(approx, basis.lowpass,
                                                  basis.highpass)
        mean = detail.mean(axis=1)
        xi[j] = float(np.dot(mean, mean))
    return xi


def extract_periods(X, basis: WaveletBasis, k: int) -> PeriodSet:
    """Wavelet-energy period selection over the columns of X.

    Analyzes the trailing power-of-two window when the length is not a
    multiple of 2^J. Levels whose period would reach the window length are
    not selectable (they cannot be folded).
    """
    X = _as_columns(X)
    T = X.shape[0]
    if T < 4:
        raise ValueError("need at least 4 samples")
    J = min(int(math.log2(T)), MAX_LEVELS)
    Xa = X if T % (1 << J) == 0 else X[-(1 << int(math.log2(T))):]
    xi = _column_mean_detail_energies(Xa, basis, J)
    admissible = np.array([j + 1 for j in range(J) if (1 << (j + 1)) < T], dtype=int)
    if admissible.size == 0:
        raise ValueError("no admissible levels: window too short")
    sub_levels, sub_amps = select_topk(xi[admissible - 1], k)
    return levels_to_periods(admissible[sub_levels - 1], sub_amps, 1.0, T)


def extract_periods_fft(X, k: int) -> PeriodSet:
    """FFT-amplitude period selection (ablation variant of extract_periods).

    Mean magnitude spectrum across columns, top-k non-DC bins, ties to the
    lower bin; period = ceil(T / bin). The stored level is the bin index.
    """
    X = _as_columns(X)
    T = X.shape[0]
    if T < 4:
        raise ValueError("need at least 4 samples")
    if k < 1:
        raise ValueError("k must be >= 1")
    spectrum = np.abs(np.fft.rfft(X, axis=0)).mean(axis=1)
    spectrum[0] = 0.0
    bins = np.arange(1, spectrum.shape[0])
    order = np.argsort(-spectrum[1:], kind="stable")[: min(k, bins.size)]
    entries = []
    for b in bins[order]:
        period = -(-T // int(b))
        entries.append(
            PeriodEntry(
                level=int(b),
                freq_hz=float(b) / T,
                period=period,
                folds=-(-T // period),
                amplitude=float(spectrum[b]),
            )
        )
    return PeriodSet(entries=tuple(entries))
