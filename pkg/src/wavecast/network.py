"""The forecasting network: per-timestep embedding, residual-stacked blocks
that fold the sequence per selected period and convolve it in 2D, softmax
amplitude aggregation, and an affine one-step head.

Gradients are exact reverse-mode derivatives of the forward computation with
the discrete period selection and the aggregation weights treated as
constants of each pass (they carry no gradient).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._kernels import conv2d_same, conv2d_same_grads
from .tensorize import Folded2D, fold, pad_to_multiple, unfold_trunc
from .wavelets import (
    BASIS_NAMES,
    PeriodSet,
    extract_periods,
    extract_periods_fft,
    get_basis,
)

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class NetworkConfig:
    input_channels: int
    embed_dim: int = 16
    layers: int = 1
    top_k: int = 2
    basis: str = "haar"
    kernel_sizes: tuple = (1, 3, 5)
    window_len: int = 64
    seed: int = 0
    extractor: str = "dwt"

    def __post_init__(self):
        object.__setattr__(self, "kernel_sizes", tuple(int(s) for s in self.kernel_sizes))
        if self.input_channels < 1:
            raise ValueError("input_channels must be >= 1")
        if self.embed_dim < 1:
            raise ValueError("embed_dim must be >= 1")
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not self.kernel_sizes or any(s < 1 or s % 2 == 0 for s in self.kernel_sizes):
            raise ValueError("kernel sizes must be odd integers >= 1")
        if self.window_len < 8:
            raise ValueError("window_len must be >= 8")
        if self.basis not in BASIS_NAMES:
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.extractor not in ("dwt", "fft"):
            raise ValueError(f"unknown extractor {self.extractor!r}")


def param_shapes(cfg: NetworkConfig) -> dict:
    d, n = cfg.embed_dim, cfg.input_channels
    shapes = {"embed.w": (d, n), "embed.b": (d,)}
    for layer in range(cfg.layers):
        for s in cfg.kernel_sizes:
            shapes[f"block{layer}.conv{s}.w"] = (d, d, s, s)
            shapes[f"block{layer}.conv{s}.b"] = (d,)
        shapes[f"block{layer}.merge.w"] = (d, d)
        shapes[f"block{layer}.merge.b"] = (d,)
    shapes["head.w"] = (n, d)
    shapes["head.b"] = (n,)
    return shapes


class Network:
    """Parameter container with matching gradient slots."""

    def __init__(self, config: NetworkConfig, params: dict):
        self.config = config
        expected = param_shapes(config)
        if set(params) != set(expected):
            raise ValueError("parameter set does not match the configuration")
        for name, shape in expected.items():
            arr = np.asarray(params[name], dtype=float)
            if arr.shape != tuple(shape):
                raise ValueError(
                    f"shape mismatch for {name}: {arr.shape} != {tuple(shape)}"
                )
            if not np.isfinite(arr).all():
                raise ValueError(f"non-finite parameter {name}")
            params[name] = arr
        self.params = params
        self.grads = {name: np.zeros(shape) for name, shape in expected.items()}

    def zero_grads(self):
        for g in self.grads.values():
            g[...] = 0.0

    def block_params(self, layer: int) -> dict:
        convs = {
            s: (self.params[f"block{layer}.conv{s}.w"], self.params[f"block{layer}.conv{s}.b"])
            for s in self.config.kernel_sizes
        }
        merge = (self.params[f"block{layer}.merge.w"], self.params[f"block{layer}.merge.b"])
        return {"convs": convs, "merge": merge}

    def copy_params(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}

    def load_params(self, params: dict):
        for name, arr in params.items():
            self.params[name][...] = arr


def init_network(cfg: NetworkConfig) -> Network:
    """Seeded symmetric init: weights uniform in +-sqrt(6/(fan_in+fan_out)),
    biases zero."""
    rng = np.random.default_rng(cfg.seed)
    d, n = cfg.embed_dim, cfg.input_channels
    params = {}
    for name, shape in param_shapes(cfg).items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
            continue
        if name == "embed.w":
            fan_in, fan_out = n, d
        elif name == "head.w":
            fan_in, fan_out = d, n
        elif ".conv" in name:
            s = shape[2]
            fan_in = fan_out = d * s * s
        else:  # merge
            fan_in = fan_out = d
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=shape)
    return Network(cfg, params)


# ---------------------------------------------------------------------------
# forward pieces


def embed(net: Network, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != net.config.input_channels:
        raise ValueError(
            f"shape mismatch: expected (T, {net.config.input_channels}), got {X.shape}"
        )
    return X @ net.params["embed.w"].T + net.params["embed.b"]


def softmax_weights(amplitudes) -> np.ndarray:
    a = np.asarray(amplitudes, dtype=float)
    if not np.isfinite(a).all():
        raise ValueError("non-finite amplitude")
    e = np.exp(a - a.max())
    return e / e.sum()


def aggregate(reps, amplitudes) -> np.ndarray:
    """Softmax-amplitude weighted sum of the per-period representations."""
    reps = [np.asarray(r, dtype=float) for r in reps]
    if len(reps) < 1:
        raise ValueError("need at least one representation")
    if any(r.shape != reps[0].shape for r in reps):
        raise ValueError("representation shapes differ")
    w = softmax_weights(amplitudes)
    if w.shape[0] != len(reps):
        raise ValueError("one amplitude per representation required")
    out = np.zeros_like(reps[0])
    for wi, r in zip(w, reps):
        out += wi * r
    return out


def inception_forward(folded: Folded2D, params: dict, relu: bool = True,
                      _cache: dict | None = None) -> Folded2D:
    """Parallel same-padded convolutions averaged, 1x1 merge, optional ReLU."""
    x = folded.tensor
    convs = params["convs"]
    acc = None
    for w, b in convs.values():
        out = conv2d_same(x, w, b)
        acc = out if acc is None else acc + out
    avg = acc / len(convs)
    merge_w, merge_b = params["merge"]
    pre = avg @ merge_w.T + merge_b
    out = np.maximum(pre, 0.0) if relu else pre
    if _cache is not None:
        _cache["folded_x"] = x
        _cache["branch_avg"] = avg
        _cache["pre"] = pre
    return Folded2D(
        tensor=out, original_len=folded.original_len,
        period=folded.period, folds=folded.folds,
    )


def _extract(X, cfg: NetworkConfig) -> PeriodSet:
    if cfg.extractor == "fft":
        return extract_periods_fft(X, cfg.top_k)
    return extract_periods(X, get_basis(cfg.basis), cfg.top_k)


def _block_forward(X, block, pset: PeriodSet, relu: bool, cache: dict | None):
    weights = softmax_weights(pset.amplitudes)
    T = X.shape[0]
    reps = []
    branch_caches = [] if cache is not None else None
    for entry in pset.entries:
        padded, orig = pad_to_multiple(X, entry.period)
        folded = fold(padded, entry.period, entry.folds, original_len=orig)
        bc = {} if cache is not None else None
        conv = inception_forward(folded, block, relu=relu, _cache=bc)
        reps.append(unfold_trunc(conv))
        if branch_caches is not None:
            branch_caches.append(bc)
    out = np.zeros_like(X)
    for wi, r in zip(weights, reps):
        out += wi * r
    if cache is not None:
        cache["pset"] = pset
        cache["weights"] = weights
        cache["branches"] = branch_caches
        cache["T"] = T
    return out


def times_block(X, params, k: int, basis, relu: bool = True,
                period_set: PeriodSet | None = None,
                extractor: str = "dwt") -> np.ndarray:
    """One block: extract periods, fold/convolve/unfold per period, aggregate.

    The residual addition is the caller's job.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] < 8:
        raise ValueError("need at least 8 timesteps")
    if period_set is None:
        if extractor == "fft":
            period_set = extract_periods_fft(X, k)
        else:
            if isinstance(basis, str):
                basis = get_basis(basis)
            period_set = extract_periods(X, basis, k)
    return _block_forward(X, params, period_set, relu, None)


def _forward_full(net: Network, window, plan=None, need_cache=False):
    cfg = net.config
    window = np.asarray(window, dtype=float)
    if window.shape != (cfg.window_len, cfg.input_channels):
        raise ValueError(
            f"shape mismatch: expected ({cfg.window_len}, {cfg.input_channels}), "
            f"got {window.shape}"
        )
    if plan is not None and len(plan) != cfg.layers:
        raise ValueError("plan must hold one period set per layer")
    E = embed(net, window)
    X = E
    layer_caches = []
    plan_out = []
    for layer in range(cfg.layers):
        pset = plan[layer] if plan is not None else _extract(X, cfg)
        plan_out.append(pset)
        cache = {} if need_cache else None
        block_out = _block_forward(X, net.block_params(layer), pset, True, cache)
        if need_cache:
            cache["x_in"] = X
            layer_caches.append(cache)
        X = X + block_out
    feat = X[-1]
    y = net.params["head.w"] @ feat + net.params["head.b"]
    caches = {
        "window": window,
        "embed_out": E,
        "layers": layer_caches,
        "feat": feat,
        "plan": plan_out,
    }
    return y, caches


def forward(net: Network, window, plan=None) -> np.ndarray:
    """One-step-ahead prediction of all channels from one input window."""
    y, _ = _forward_full(net, window, plan=plan, need_cache=False)
    return y


def forward_plan(net: Network, window) -> list:
    """The period sets each layer would extract for this window."""
    _, caches = _forward_full(net, window, plan=None, need_cache=False)
    return caches["plan"]


def backward(net: Network, window, target) -> float:
    """Accumulate d(loss)/d(theta) into the gradient slots; returns the loss.

    loss = mean squared error of forward(window) against target over channels.
    """
    cfg = net.config
    target = np.asarray(target, dtype=float)
    if target.shape != (cfg.input_channels,):
        raise ValueError(f"target shape {target.shape} != ({cfg.input_channels},)")
    y, caches = _forward_full(net, window, need_cache=True)
    if not np.isfinite(y).all():
        raise FloatingPointError("numeric overflow in forward pass")
    resid = y - target
    loss = float(np.mean(resid * resid))
    n = cfg.input_channels
    gy = 2.0 * resid / n

    grads = net.grads
    feat = caches["feat"]
    grads["head.w"] += np.outer(gy, feat)
    grads["head.b"] += gy
    gX = np.zeros((cfg.window_len, cfg.embed_dim))
    gX[-1] = net.params["head.w"].T @ gy

    for layer in range(cfg.layers - 1, -1, -1):
        cache = caches["layers"][layer]
        block = net.block_params(layer)
        merge_w, _ = block["merge"]
        n_sizes = len(cfg.kernel_sizes)
        g_in = gX.copy()  # residual path
        T = cache["T"]
        for entry, wi, bc in zip(
            cache["pset"].entries, cache["weights"], cache["branches"]
        ):
            gy1 = wi * gX
            padded_rows = entry.folds * entry.period
            g_flat = np.zeros((padded_rows, cfg.embed_dim))
            g_flat[:T] = gy1
            gM = g_flat.reshape(entry.folds, entry.period, cfg.embed_dim)
            gM = gM * (bc["pre"] > 0.0)
            grads[f"block{layer}.merge.b"] += gM.sum(axis=(0, 1))
            grads[f"block{layer}.merge.w"] += np.einsum(
                "fpo,fpc->oc", gM, bc["branch_avg"]
            )
            g_avg = gM @ merge_w
            g_branch = np.ascontiguousarray(g_avg / n_sizes)
            g_x2 = np.zeros_like(bc["folded_x"])
            for s in cfg.kernel_sizes:
                w_s = net.params[f"block{layer}.conv{s}.w"]
                gxs, gws, gbs = conv2d_same_grads(bc["folded_x"], w_s, g_branch)
                grads[f"block{layer}.conv{s}.w"] += gws
                grads[f"block{layer}.conv{s}.b"] += gbs
                g_x2 += gxs
            g_in += g_x2.reshape(padded_rows, cfg.embed_dim)[:T]
        gX = g_in

    grads["embed.w"] += gX.T @ caches["window"]
    grads["embed.b"] += gX.sum(axis=0)
    if not all(np.isfinite(g).all() for g in grads.values()):
        raise FloatingPointError("numeric overflow in backward pass")
    return loss


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(net: Network, path) -> None:
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(net.config),
        "params": [
            {
                "name": name,
                "shape": list(arr.shape),
                "values": [float(f"{v:.17g}") for v in arr.ravel()],
            }
            for name, arr in sorted(net.params.items())
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_checkpoint(path) -> Network:
    with open(path) as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint format version: {version!r}")
    cfg_dict = dict(payload["config"])
    cfg = NetworkConfig(**cfg_dict)
    expected = param_shapes(cfg)
    params = {}
    for item in payload["params"]:
        name = item["name"]
        if name not in expected:
            raise ValueError(f"unknown parameter {name!r} in checkpoint")
        shape = tuple(item["shape"])
        if shape != expected[name]:
            raise ValueError(
                f"shape mismatch for {name}: checkpoint {shape} != {expected[name]}"
            )
        values = np.asarray(item["values"], dtype=float)
        if values.size != int(np.prod(shape)):
            raise ValueError(f"value count mismatch for {name}")
        params[name] = values.reshape(shape)
    missing = set(expected) - set(params)
    if missing:
        raise ValueError(f"checkpoint missing parameters: {sorted(missing)}")
    return Network(cfg, params)
