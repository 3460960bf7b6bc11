#!/usr/bin/env python3
"""Benchmark the numba kernel path against the pure-numpy fallback.

Per-kernel timings run both implementations in-process; the end-to-end
training-step timing re-launches this script with WAVECAST_NO_NUMBA=1 so the
fallback is measured under the same import path it gets in production.
"""

import os
import subprocess
import sys
import time

import numpy as np

from wavecast import _kernels
from wavecast.wavelets import get_basis


def time_fn(fn, *args, repeat=50):
    fn(*args)  # warm-up (and jit compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def train_step_ms(steps=100):
    from wavecast.dataset import SynthSpec, synth_multiperiod
    from wavecast.network import NetworkConfig, backward, init_network

    frame = synth_multiperiod(SynthSpec(length=220, periods=(16, 64),
                                        amplitudes=(1.0, 0.5), noise_std=0.1,
                                        channels=1, seed=1))
    cfg = NetworkConfig(input_channels=1, embed_dim=16, layers=1, top_k=2,
                        basis="haar", kernel_sizes=(1, 3, 5), window_len=96,
                        seed=0)
    net = init_network(cfg)
    v = frame.values
    backward(net, v[:96], v[96])
    t0 = time.perf_counter()
    for i in range(steps):
        net.zero_grads()
        j = i % 100
        backward(net, v[j:j + 96], v[j + 96])
    return (time.perf_counter() - t0) / steps * 1000


def main():
    rng = np.random.default_rng(0)
    basis = get_basis("db4")
    x = rng.normal(size=(8, 16, 16))
    w = rng.normal(size=(16, 16, 5, 5))
    b = rng.normal(size=16)
    gy = rng.normal(size=(8, 16, 16))
    sig2d = rng.normal(size=(256, 16))
    sig1d = np.ascontiguousarray(sig2d[:, 0])
    long_sig = rng.normal(size=4096)
    cases = [
        ("conv2d_same (8x16 cells, 16ch, k=5)", "conv2d_same", (x, w, b)),
        ("conv2d_same_grads (same shape)", "conv2d_same_grads", (x, w, gy)),
        ("dwt_level (T=256, db4)", "dwt_level", (sig1d, basis.lowpass, basis.highpass)),
        ("dwt_level_multi (256x16, db4)", "dwt_level_multi",
         (sig2d, basis.lowpass, basis.highpass)),
        ("nlms (T=4096, taps=8)", "nlms", (long_sig, 8, 0.5, 1e-12)),
    ]
    impls = list(_kernels.IMPLEMENTATIONS)
    print(f"active path: {_kernels.ACTIVE}")
    print(f"{'kernel':38s}" + "".join(f"{name:>14s}" for name in impls))
    for label, key, args in cases:
        row = f"{label:38s}"
        for name in impls:
            dt = time_fn(_kernels.IMPLEMENTATIONS[name][key], *args)
            row += f"{dt * 1e6:>12.1f}us"
        print(row)

    if len(sys.argv) > 1 and sys.argv[1] == "--train-step":
        return  # per-kernel table only for the subprocess

    print()
    print(f"forward+backward step, {_kernels.ACTIVE} path: "
          f"{train_step_ms():.2f} ms")
    if _kernels.NUMBA_ENABLED:
        env = dict(os.environ, WAVECAST_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c",
             "from benchmarks.bench_kernels import train_step_ms;"
             "print(f'{train_step_ms():.2f}')"],
            capture_output=True, text=True, env=env,
            cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
        )
        if out.returncode == 0:
            print(f"forward+backward step, numpy fallback: "
                  f"{out.stdout.strip()} ms")
        else:
            print(f"fallback measurement failed: {out.stderr.strip()}")


if __name__ == "__main__":
    main()
