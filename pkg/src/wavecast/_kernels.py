"""Hot numeric kernels: 2D same-padded convolution, circular DWT filtering, NLMS.

Each kernel has two implementations: explicit loops compiled with numba
(the default) and a vectorized pure-numpy fallback. Set ``WAVECAST_NO_NUMBA=1``
to force the numpy path; it is also selected automatically when numba is not
importable. ``IMPLEMENTATIONS`` exposes both paths for tests and benchmarks.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("WAVECAST_NO_NUMBA", "0").strip().lower()
NUMBA_REQUESTED = _flag not in {"1", "true", "yes"}

try:
    if not NUMBA_REQUESTED:
        raise ImportError("numba disabled via WAVECAST_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# loop bodies (numba-compilable; matrix products hit BLAS inside numba)


def _im2col(x, kh, kw):
    H, W, C = x.shape
    ph, pw = kh // 2, kw // 2
    cols = np.zeros((H * W, C * kh * kw))
    for p in range(H):
        for q in range(W):
            row = p * W + q
            for u in range(kh):
                i = p + u - ph
                if i < 0 or i >= H:
                    continue
                for v in range(kw):
                    j = q + v - pw
                    if j < 0 or j >= W:
                        continue
                    base = u * kw + v
                    for c in range(C):
                        cols[row, c * kh * kw + base] = x[i, j, c]
    return cols


def _conv2d_same_loops(x, w, b):
    H, W, C = x.shape
    O, kh, kw = w.shape[0], w.shape[2], w.shape[3]
    cols = _im2col(x, kh, kw)
    wmat = np.ascontiguousarray(w.reshape(O, C * kh * kw))
    y = cols @ wmat.T
    out = np.empty((H, W, O))
    for p in range(H):
        for q in range(W):
            for o in range(O):
                out[p, q, o] = y[p * W + q, o] + b[o]
    return out


def _conv2d_same_grads_loops(x, w, gy):
    H, W, C = x.shape
    O, kh, kw = w.shape[0], w.shape[2], w.shape[3]
    ph, pw = kh // 2, kw // 2
    K = C * kh * kw
    cols = _im2col(x, kh, kw)
    gy2 = np.ascontiguousarray(gy.reshape(H * W, O))
    gb = np.zeros(O)
    for r in range(H * W):
        for o in range(O):
            gb[o] += gy2[r, o]
    gw = (np.ascontiguousarray(gy2.T) @ cols).reshape(O, C, kh, kw)
    gcols = gy2 @ np.ascontiguousarray(w.reshape(O, K))
    gx = np.zeros((H, W, C))
    for p in range(H):
        for q in range(W):
            row = p * W + q
            for u in range(kh):
                i = p + u - ph
                if i < 0 or i >= H:
                    continue
                for v in range(kw):
                    j = q + v - pw
                    if j < 0 or j >= W:
                        continue
                    base = u * kw + v
                    for c in range(C):
                        gx[i, j, c] += gcols[row, c * kh * kw + base]
    return gx, gw, gb


def _dwt_level_loops(x, lo, hi):
    T = x.shape[0]
    L = lo.shape[0]
    half = T // 2
    detail = np.zeros(half)
    approx = np.zeros(half)
    for i in range(half):
        d = 0.0
        a = 0.0
        for k in range(L):
            v = x[(2 * i + k) % T]
            d += hi[k] * v
            a += lo[k] * v
        detail[i] = d
        approx[i] = a
    return detail, approx


def _dwt_level_multi_loops(x, lo, hi):
    # one call per level for all feature columns of a (T, d) matrix
    T, d = x.shape
    L = lo.shape[0]
    half = T // 2
    detail = np.zeros((half, d))
    approx = np.zeros((half, d))
    for i in range(half):
        for k in range(L):
            idx = (2 * i + k) % T
            hk = hi[k]
            lk = lo[k]
            for c in range(d):
                v = x[idx, c]
                detail[i, c] += hk * v
                approx[i, c] += lk * v
    return detail, approx


def _nlms_loops(x, taps, step, eps):
    T = x.shape[0]
    y = x.copy()
    w = np.zeros(taps)
    u = np.zeros(taps)
    for n in range(taps, T):
        for k in range(taps):
            u[k] = x[n - 1 - k]
        yhat = 0.0
        norm = eps
        for k in range(taps):
            yhat += w[k] * u[k]
            norm += u[k] * u[k]
        e = x[n] - yhat
        scale = step * e / norm
        for k in range(taps):
            w[k] += scale * u[k]
        y[n] = yhat
    return y


# ---------------------------------------------------------------------------
# vectorized numpy fallbacks


def _conv2d_same_numpy(x, w, b):
    kh, kw = w.shape[2], w.shape[3]
    xp = np.pad(x, ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(0, 1))
    return np.tensordot(win, w, axes=((2, 3, 4), (1, 2, 3))) + b


def _conv2d_same_grads_numpy(x, w, gy):
    kh, kw = w.shape[2], w.shape[3]
    gb = gy.sum(axis=(0, 1))
    xp = np.pad(x, ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(0, 1))
    gw = np.einsum("pqo,pqcuv->ocuv", gy, win)
    # input grad: same-padded convolution of gy with the flipped, transposed
    # kernel (exact for odd kernel sizes)
    wflip = np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
    gx = _conv2d_same_numpy(gy, wflip, np.zeros(w.shape[1]))
    return gx, gw, gb


def _dwt_level_numpy(x, lo, hi):
    T = x.shape[0]
    idx = (2 * np.arange(T // 2)[:, None] + np.arange(lo.shape[0])[None, :]) % T
    xs = x[idx]
    return xs @ hi, xs @ lo


def _dwt_level_multi_numpy(x, lo, hi):
    T = x.shape[0]
    idx = (2 * np.arange(T // 2)[:, None] + np.arange(lo.shape[0])[None, :]) % T
    xs = x[idx]  # (half, L, d)
    return np.tensordot(xs, hi, axes=([1], [0])), np.tensordot(xs, lo, axes=([1], [0]))


def _nlms_numpy(x, taps, step, eps):
    # inherently sequential; same recursion as the loop body
    T = x.shape[0]
    y = x.copy()
    w = np.zeros(taps)
    for n in range(taps, T):
        u = x[n - taps:n][::-1]
        yhat = w @ u
        e = x[n] - yhat
        w = w + (step * e / (eps + u @ u)) * u
        y[n] = yhat
    return y


IMPLEMENTATIONS = {
    "numpy": {
        "conv2d_same": _conv2d_same_numpy,
        "conv2d_same_grads": _conv2d_same_grads_numpy,
        "dwt_level": _dwt_level_numpy,
        "dwt_level_multi": _dwt_level_multi_numpy,
        "nlms": _nlms_numpy,
    }
}

if NUMBA_ENABLED:
    _im2col = njit(cache=True)(_im2col)
    IMPLEMENTATIONS["numba"] = {
        "conv2d_same": njit(cache=True)(_conv2d_same_loops),
        "conv2d_same_grads": njit(cache=True)(_conv2d_same_grads_loops),
        "dwt_level": njit(cache=True)(_dwt_level_loops),
        "dwt_level_multi": njit(cache=True)(_dwt_level_multi_loops),
        "nlms": njit(cache=True)(_nlms_loops),
    }

ACTIVE = "numba" if NUMBA_ENABLED else "numpy"

conv2d_same = IMPLEMENTATIONS[ACTIVE]["conv2d_same"]
conv2d_same_grads = IMPLEMENTATIONS[ACTIVE]["conv2d_same_grads"]
dwt_level_pair = IMPLEMENTATIONS[ACTIVE]["dwt_level"]
dwt_level_multi = IMPLEMENTATIONS[ACTIVE]["dwt_level_multi"]
nlms_predict = IMPLEMENTATIONS[ACTIVE]["nlms"]
