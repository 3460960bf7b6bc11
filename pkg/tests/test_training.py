"""Window construction, the training loop, recursive rollouts, evaluation."""

import numpy as np
import pytest

from wavecast.dataset import SplitRatios, SynthSpec, TimeSeriesFrame, fit_stats, split, standardize, synth_multiperiod
from wavecast.network import Network, NetworkConfig, init_network, param_shapes
from wavecast.training import (
    TrainConfig,
    evaluate,
    forecast_recursive,
    history_to_csv,
    make_windows,
    persistence_forecast,
    train,
)


def frame_of(values):
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return TimeSeriesFrame(values=values, mask=np.ones_like(values, dtype=bool),
                           sample_freq=1.0,
                           channel_names=tuple(f"c{i}" for i in range(values.shape[1])))


def zero_net(cfg):
    return Network(cfg, {n: np.zeros(s) for n, s in param_shapes(cfg).items()})


# --- windows ------------------------------------------------------------------

def test_make_windows_counts():
    assert len(make_windows(frame_of(np.arange(10.0)), 8)) == 2
    pairs = make_windows(frame_of(np.arange(9.0)), 8)
    assert len(pairs) == 1
    assert pairs[0][1][0] == 8.0


def test_make_windows_too_short():
    with pytest.raises(ValueError, match="frame too short"):
        make_windows(frame_of(np.arange(8.0)), 8)


def test_make_windows_alignment():
    pairs = make_windows(frame_of(np.arange(12.0)), 8, stride=2)
    assert [p[1][0] for p in pairs] == [8.0, 10.0]
    np.testing.assert_array_equal(pairs[1][0][:, 0], np.arange(2.0, 10.0))


# --- train ---------------------------------------------------------------------

def sine_frame(T, period=16, channels=1, noise=0.0, seed=0):
    return synth_multiperiod(SynthSpec(length=T, periods=(period,), amplitudes=(1.0,),
                                       noise_std=noise, channels=channels, seed=seed))


def test_train_zero_data_zero_head_loss_zero():
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=1,
                        window_len=8, seed=0)
    net = zero_net(cfg)
    tcfg = TrainConfig(epochs=1, batch_size=4, learning_rate=0.01, horizon=1,
                       window_len=8, seed=0)
    frame = frame_of(np.zeros(20))
    net, history = train(net, frame, frame, tcfg)
    assert history[0].train_loss == 0.0
    assert history[0].val_loss == 0.0


def test_train_loss_decreases_on_noiseless_sine():
    frame = sine_frame(400, period=16)
    tr, te, va = split(frame, SplitRatios())
    stats = fit_stats(tr)
    tr_s, va_s = standardize(tr, stats), standardize(va, stats)
    cfg = NetworkConfig(input_channels=1, embed_dim=8, layers=1, top_k=1,
                        window_len=32, seed=1)
    net = init_network(cfg)
    tcfg = TrainConfig(epochs=50, batch_size=32, learning_rate=3e-3, horizon=1,
                       window_len=32, seed=1, patience=50)
    net, history = train(net, tr_s, va_s, tcfg)
    assert history[-1].train_loss < 0.25 * history[0].train_loss


def test_train_deterministic_given_seed():
    frame = sine_frame(240, period=8, noise=0.1, seed=4)
    tr, te, va = split(frame, SplitRatios())
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=1,
                        window_len=16, seed=2)
    tcfg = TrainConfig(epochs=3, batch_size=8, learning_rate=1e-3, horizon=1,
                       window_len=16, seed=2)
    runs = []
    for _ in range(2):
        net, history = train(init_network(cfg), tr, va, tcfg)
        runs.append((history, net.copy_params()))
    assert [(h.train_loss, h.val_loss) for h in runs[0][0]] == \
        [(h.train_loss, h.val_loss) for h in runs[1][0]]
    for name in runs[0][1]:
        np.testing.assert_array_equal(runs[0][1][name], runs[1][1][name])


def test_train_lr0_leaves_params_unchanged():
    frame = sine_frame(200, period=8)
    tr, te, va = split(frame, SplitRatios())
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=1,
                        window_len=16, seed=3)
    net = init_network(cfg)
    before = net.copy_params()
    tcfg = TrainConfig(epochs=2, batch_size=8, learning_rate=0.0, horizon=1,
                       window_len=16, seed=3)
    net, _ = train(net, tr, va, tcfg)
    for name in before:
        np.testing.assert_array_equal(net.params[name], before[name])


def test_train_never_mutates_frames():
    frame = sine_frame(200, period=8, noise=0.05, seed=6)
    tr, te, va = split(frame, SplitRatios())
    snapshot = tr.values.copy()
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=1,
                        window_len=16, seed=0)
    tcfg = TrainConfig(epochs=1, batch_size=8, learning_rate=1e-3, horizon=1,
                       window_len=16, seed=0)
    train(init_network(cfg), tr, va, tcfg)
    np.testing.assert_array_equal(tr.values, snapshot)


def test_history_csv_shape():
    frame = sine_frame(200, period=8)
    tr, te, va = split(frame, SplitRatios())
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=1,
                        window_len=16, seed=0)
    tcfg = TrainConfig(epochs=2, batch_size=8, learning_rate=1e-3, horizon=1,
                       window_len=16, seed=0)
    _, history = train(init_network(cfg), tr, va, tcfg)
    lines = history_to_csv(history).strip().splitlines()
    assert lines[0] == "epoch,train_loss,val_loss"
    assert len(lines) == len(history) + 1


# --- rollouts ---------------------------------------------------------------------

def plus_one_net():
    """Single-channel net computing last-input + 1."""
    cfg = NetworkConfig(input_channels=1, embed_dim=1, layers=1, top_k=1,
                        window_len=8, seed=0)
    net = zero_net(cfg)
    net.params["embed.w"][...] = [[1.0]]
    net.params["head.w"][...] = [[1.0]]
    net.params["head.b"][...] = [1.0]
    return net


def test_recursive_hand_rollout():
    net = plus_one_net()
    window = np.arange(-2.0, 6.0)[:, None]  # ends at 5
    result = forecast_recursive(net, window, 3)
    np.testing.assert_allclose(result.predictions[:, 0], [6.0, 7.0, 8.0], atol=1e-12)


def test_recursive_beta1_equals_forward():
    from wavecast.network import forward
    cfg = NetworkConfig(input_channels=2, embed_dim=4, layers=1, top_k=2,
                        window_len=16, seed=9)
    net = init_network(cfg)
    window = np.random.default_rng(20).normal(size=(16, 2))
    np.testing.assert_array_equal(
        forecast_recursive(net, window, 1).predictions[0], forward(net, window))


def test_recursive_zero_network_fixpoint():
    cfg = NetworkConfig(input_channels=1, embed_dim=2, layers=1, top_k=1,
                        window_len=8, seed=0)
    net = zero_net(cfg)
    result = forecast_recursive(net, np.ones((8, 1)), 5)
    np.testing.assert_array_equal(result.predictions, np.zeros((5, 1)))


def test_recursive_prefix_property():
    cfg = NetworkConfig(input_channels=1, embed_dim=4, layers=1, top_k=2,
                        window_len=16, seed=13)
    net = init_network(cfg)
    window = np.random.default_rng(21).normal(size=(16, 1))
    full = forecast_recursive(net, window, 7).predictions
    prefix = forecast_recursive(net, window, 3).predictions
    np.testing.assert_array_equal(full[:3], prefix)


def test_persistence_examples():
    window = np.array([[1.0, 2.0], [3.0, 4.0]])
    out = persistence_forecast(window, 2)
    np.testing.assert_array_equal(out.predictions, [[3.0, 4.0], [3.0, 4.0]])
    np.testing.assert_array_equal(persistence_forecast(window, 1).predictions,
                                  [[3.0, 4.0]])
    np.testing.assert_array_equal(persistence_forecast(np.zeros((3, 1)), 2).predictions,
                                  np.zeros((2, 1)))


# --- evaluate ----------------------------------------------------------------------

def test_evaluate_persistence_on_constantish_series():
    # persistence is exact on a constant series: all metrics zero
    values = np.full((40, 2), 1.5)
    values[:, 1] = 2.5
    report = evaluate(None, frame_of(values), horizon=3, window_len=8)
    for ch in report.per_channel:
        assert ch.mae == 0.0 and ch.mse == 0.0 and ch.rmse == 0.0


def test_evaluate_persistence_alternating():
    values = np.array([float(i % 2) for i in range(30)])
    report = evaluate(None, frame_of(values), horizon=1, window_len=8)
    assert report.per_channel[0].mae == pytest.approx(1.0)


def test_evaluate_perfect_net_all_zero():
    net = plus_one_net()
    report = evaluate(net, frame_of(np.arange(0.0, 30.0)), horizon=4, window_len=8)
    for ch in report.per_channel:
        assert ch.mae == pytest.approx(0.0, abs=1e-9)
        assert ch.mse == pytest.approx(0.0, abs=1e-9)


def test_evaluate_too_short():
    with pytest.raises(ValueError, match="too short"):
        evaluate(None, frame_of(np.arange(8.0)), horizon=4, window_len=8)


def test_evaluate_respects_origin_stride():
    values = np.arange(0.0, 40.0)
    r1 = evaluate(None, frame_of(values), horizon=2, window_len=8, origin_stride=1)
    r5 = evaluate(None, frame_of(values), horizon=2, window_len=8, origin_stride=5)
    assert r5.n_origins < r1.n_origins


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(horizon=0)
    with pytest.raises(ValueError):
        TrainConfig(window_len=4)
