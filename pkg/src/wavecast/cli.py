"""Command-line orchestration of the full forecasting pipeline.

Subcommands: synth, preprocess, periods, tune, train, forecast, evaluate,
ablate. Configuration is a JSON file validated in full before any computation
starts; unknown keys are rejected. All outputs are deterministic functions of
the inputs and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dataset import (
    SplitRatios,
    SynthSpec,
    TimeSeriesFrame,
    denoise_adaptive,
    fit_stats,
    impute_missing,
    inject_local_periodicity,
    load_csv,
    save_csv,
    split,
    standardize,
    synth_multiperiod,
)
from .metrics import metrics_to_csv
from .network import (
    NetworkConfig,
    init_network,
    load_checkpoint,
    save_checkpoint,
)
from .tpe import (
    CategoricalDim,
    IntUniformDim,
    LogUniformDim,
    SearchSpace,
    UniformDim,
    default_search_space,
    history_to_csv,
    optimize,
)
from .training import (
    TrainConfig,
    evaluate,
    forecast_recursive,
    history_to_csv as losses_to_csv,
    train,
)

ABLATION_VARIANTS = (
    ("WCN", "dwt", "tpe"),
    ("WCN-FFT", "fft", "tpe"),
    ("WCN-RS", "dwt", "random"),
    ("WCN-w/o-TPE", "dwt", None),
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InjectSpec:
    center: int
    width: float
    period: int
    amp: float


@dataclass(frozen=True)
class PreprocessConfig:
    impute: bool = True
    denoise: bool = False
    taps: int = 8
    step: float = 0.5


@dataclass(frozen=True)
class DataConfig:
    csv: str | None = None
    freq_hz: float = 1.0
    synth: SynthSpec | None = None
    inject: tuple = ()
    preprocess: PreprocessConfig = PreprocessConfig()


@dataclass(frozen=True)
class TpeConfig:
    budget: int = 25
    n_startup: int = 10
    n_candidates: int = 24
    gamma: float = 0.25
    seed: int = 0
    space: SearchSpace | None = None


@dataclass(frozen=True)
class EvalConfig:
    horizons: tuple = (10, 30, 60)
    origin_stride: int = 1


@dataclass(frozen=True)
class RunConfig:
    data: DataConfig
    split: SplitRatios
    network: dict
    train: TrainConfig
    tpe: TpeConfig
    evaluate: EvalConfig


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r} in {where}")


def _parse_space(items) -> SearchSpace:
    dims = []
    for item in items:
        _check_keys(item, {"name", "kind", "lo", "hi", "choices"}, "tpe.space entry")
        name, kind = item["name"], item["kind"]
        if kind == "uniform":
            dims.append(UniformDim(name, float(item["lo"]), float(item["hi"])))
        elif kind == "log_uniform":
            dims.append(LogUniformDim(name, float(item["lo"]), float(item["hi"])))
        elif kind == "int_uniform":
            dims.append(IntUniformDim(name, int(item["lo"]), int(item["hi"])))
        elif kind == "categorical":
            choices = tuple(
                tuple(c) if isinstance(c, list) else c for c in item["choices"]
            )
            dims.append(CategoricalDim(name, choices))
        else:
            raise ConfigError(f"unknown dim kind {kind!r} in tpe.space")
    return SearchSpace(dims=tuple(dims))


def load_config(path, seed_override: int | None = None) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    _check_keys(raw, {"seed", "data", "split", "network", "train", "tpe", "evaluate"},
                "config root")
    master_seed = raw.get("seed")
    if seed_override is not None:
        master_seed = seed_override

    data_raw = dict(raw.get("data", {}))
    _check_keys(data_raw, {"csv", "freq_hz", "synth", "inject", "preprocess"}, "data")
    synth = None
    if "synth" in data_raw:
        s = dict(data_raw["synth"])
        _check_keys(s, {"length", "periods", "amplitudes", "noise_std", "channels",
                        "seed"}, "data.synth")
        s.setdefault("seed", master_seed if master_seed is not None else 0)
        synth = SynthSpec(
            length=int(s["length"]), periods=tuple(s["periods"]),
            amplitudes=tuple(s["amplitudes"]),
            noise_std=float(s.get("noise_std", 0.0)),
            channels=int(s.get("channels", 1)), seed=int(s["seed"]),
        )
    injects = []
    for item in data_raw.get("inject", []):
        _check_keys(item, {"center", "width", "period", "amp"}, "data.inject entry")
        injects.append(InjectSpec(center=int(item["center"]), width=float(item["width"]),
                                  period=int(item["period"]), amp=float(item["amp"])))
    prep_raw = dict(data_raw.get("preprocess", {}))
    _check_keys(prep_raw, {"impute", "denoise", "taps", "step"}, "data.preprocess")
    prep = PreprocessConfig(
        impute=bool(prep_raw.get("impute", True)),
        denoise=bool(prep_raw.get("denoise", False)),
        taps=int(prep_raw.get("taps", 8)), step=float(prep_raw.get("step", 0.5)),
    )
    data = DataConfig(csv=data_raw.get("csv"), freq_hz=float(data_raw.get("freq_hz", 1.0)),
                      synth=synth, inject=tuple(injects), preprocess=prep)
    if data.csv is None and data.synth is None:
        raise ConfigError("data section needs either 'csv' or 'synth'")

    split_raw = dict(raw.get("split", {}))
    _check_keys(split_raw, {"train", "test", "val"}, "split")
    ratios = SplitRatios(
        train=float(split_raw.get("train", 0.7)),
        test=float(split_raw.get("test", 0.2)),
        val=float(split_raw.get("val", 0.1)),
    )

    net_raw = dict(raw.get("network", {}))
    _check_keys(net_raw, {"embed_dim", "layers", "top_k", "basis", "kernel_sizes",
                          "window_len", "seed", "extractor"}, "network")
    if "kernel_sizes" in net_raw:
        net_raw["kernel_sizes"] = tuple(net_raw["kernel_sizes"])
    if master_seed is not None:
        if seed_override is not None:
            net_raw["seed"] = int(master_seed)
        else:
            net_raw.setdefault("seed", int(master_seed))

    train_raw = dict(raw.get("train", {}))
    _check_keys(train_raw, {"epochs", "batch_size", "learning_rate", "horizon",
                            "patience", "seed"}, "train")
    if master_seed is not None:
        if seed_override is not None:
            train_raw["seed"] = int(master_seed)
        else:
            train_raw.setdefault("seed", int(master_seed))
    if "window_len" in net_raw:
        train_raw["window_len"] = int(net_raw["window_len"])
    tcfg = TrainConfig(**train_raw)

    tpe_raw = dict(raw.get("tpe", {}))
    _check_keys(tpe_raw, {"budget", "n_startup", "n_candidates", "gamma", "seed",
                          "space"}, "tpe")
    space = _parse_space(tpe_raw["space"]) if "space" in tpe_raw else None
    tpe_cfg = TpeConfig(
        budget=int(tpe_raw.get("budget", 25)),
        n_startup=int(tpe_raw.get("n_startup", 10)),
        n_candidates=int(tpe_raw.get("n_candidates", 24)),
        gamma=float(tpe_raw.get("gamma", 0.25)),
        seed=int(master_seed if seed_override is not None
                 else tpe_raw.get("seed", master_seed if master_seed is not None else 0)),
        space=space,
    )

    eval_raw = dict(raw.get("evaluate", {}))
    _check_keys(eval_raw, {"horizons", "origin_stride"}, "evaluate")
    ecfg = EvalConfig(
        horizons=tuple(int(h) for h in eval_raw.get("horizons", (10, 30, 60))),
        origin_stride=int(eval_raw.get("origin_stride", 1)),
    )
    if ecfg.origin_stride < 1 or not ecfg.horizons:
        raise ConfigError("evaluate.origin_stride must be >= 1 and horizons nonempty")

    return RunConfig(data=data, split=ratios, network=net_raw, train=tcfg,
                     tpe=tpe_cfg, evaluate=ecfg)


# ---------------------------------------------------------------------------
# pipeline helpers


def _apply_injections(frame: TimeSeriesFrame, injects) -> TimeSeriesFrame:
    for inj in injects:
        frame = inject_local_periodicity(frame, inj.center, inj.width, inj.period,
                                         inj.amp)
    return frame


def build_frame(data: DataConfig, with_inject: bool = True) -> TimeSeriesFrame:
    if data.csv is not None:
        frame = load_csv(data.csv, freq=data.freq_hz)
    else:
        frame = synth_multiperiod(data.synth)
    if with_inject:
        frame = _apply_injections(frame, data.inject)
    if data.preprocess.impute:
        frame = impute_missing(frame)
    if data.preprocess.denoise:
        frame = denoise_adaptive(frame, taps=data.preprocess.taps,
                                 step=data.preprocess.step)
    return frame


def prepare_splits(frame: TimeSeriesFrame, ratios: SplitRatios):
    tr, te, va = split(frame, ratios)
    stats = fit_stats(tr)
    return tr, te, va, stats


def _network_config(cfg: RunConfig, channels: int, **overrides) -> NetworkConfig:
    kwargs = dict(cfg.network)
    kwargs.update(overrides)
    return NetworkConfig(input_channels=channels, **kwargs)


def apply_point(point: dict, net_cfg: NetworkConfig, train_cfg: TrainConfig):
    """Overlay a search-space point onto the two configurations."""
    net_fields = {}
    train_fields = {}
    for name, value in point.items():
        if name in ("embed_dim", "layers", "top_k", "window_len"):
            net_fields[name] = int(value)
        elif name == "basis":
            net_fields[name] = str(value)
        elif name == "kernel_sizes":
            net_fields[name] = tuple(value)
        elif name == "learning_rate":
            train_fields[name] = float(value)
        elif name in ("epochs", "batch_size", "patience"):
            train_fields[name] = int(value)
        else:
            raise ConfigError(f"search dimension {name!r} maps to no hyperparameter")
    net_cfg = replace(net_cfg, **net_fields) if net_fields else net_cfg
    if "window_len" in net_fields:
        train_fields["window_len"] = net_fields["window_len"]
    train_cfg = replace(train_cfg, **train_fields) if train_fields else train_cfg
    return net_cfg, train_cfg


def _train_and_validate(net_cfg: NetworkConfig, train_cfg: TrainConfig,
                        tr_std, va_std, horizon: int, origin_stride: int) -> float:
    """Train, then score the rollout objective: horizon-averaged MSE on the
    validation split in standardized units."""
    net = init_network(net_cfg)
    net, _ = train(net, tr_std, va_std, train_cfg)
    report = evaluate(net, va_std, horizon, net_cfg.window_len,
                      origin_stride=origin_stride)
    return report.averages.mse


def make_objective(cfg: RunConfig, channels: int, tr_std, va_std):
    def objective(point: dict) -> float:
        net_cfg = _network_config(cfg, channels)
        net_cfg, train_cfg = apply_point(point, net_cfg, cfg.train)
        try:
            return _train_and_validate(net_cfg, train_cfg, tr_std, va_std,
                                       cfg.train.horizon,
                                       cfg.evaluate.origin_stride)
        except (RuntimeError, FloatingPointError):
            return float("inf")
    return objective


def _config_echo(cfg: RunConfig) -> str:
    payload = {
        "network": dict(cfg.network),
        "train": {k: getattr(cfg.train, k) for k in
                  ("epochs", "batch_size", "learning_rate", "horizon",
                   "window_len", "seed", "patience")},
        "split": {"train": cfg.split.train, "test": cfg.split.test,
                  "val": cfg.split.val},
    }
    return json.dumps(payload, sort_keys=True)


# ---------------------------------------------------------------------------
# subcommands


def _parse_float_list(text: str):
    return [float(x) for x in text.split(",") if x != ""]


def cmd_synth(args) -> int:
    periods = [int(p) for p in args.periods.split(",")]
    amps = _parse_float_list(args.amps)
    if len(periods) != len(amps):
        raise ConfigError("length mismatch: --periods and --amps")
    spec = SynthSpec(length=args.length, periods=tuple(periods),
                     amplitudes=tuple(amps), noise_std=args.noise_std,
                     channels=args.channels, seed=args.seed)
    frame = synth_multiperiod(spec)
    inject_lists = [args.inject_center, args.inject_width, args.inject_period,
                    args.inject_amp]
    given = [x for x in inject_lists if x is not None]
    if given:
        if len(given) != 4:
            raise ConfigError("all four --inject-* flags are required together")
        centers = [int(x) for x in args.inject_center.split(",")]
        widths = _parse_float_list(args.inject_width)
        iperiods = [int(x) for x in args.inject_period.split(",")]
        iamps = _parse_float_list(args.inject_amp)
        if not len(centers) == len(widths) == len(iperiods) == len(iamps):
            raise ConfigError("length mismatch: --inject-* lists")
        for c, w, p, a in zip(centers, widths, iperiods, iamps):
            frame = inject_local_periodicity(frame, c, w, p, a)
    save_csv(frame, args.out)
    print(f"wrote {frame.length} rows x {frame.channels} channels to {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    frame = load_csv(args.input, freq=args.freq)
    frame = impute_missing(frame)
    if not args.no_denoise:
        frame = denoise_adaptive(frame, taps=args.taps, step=args.step)
    save_csv(frame, args.out)
    print(f"wrote preprocessed frame ({frame.length} rows) to {args.out}")
    return 0


def cmd_periods(args) -> int:
    from .wavelets import extract_periods, extract_periods_fft, get_basis

    frame = load_csv(args.input, freq=args.freq)
    if args.fft:
        pset = extract_periods_fft(frame.values, args.top_k)
    else:
        pset = extract_periods(frame.values, get_basis(args.basis), args.top_k)
    lines = ["level,freq_hz,period_samples,folds,amplitude"]
    for e in pset.entries:
        freq_hz = e.freq_hz * frame.sample_freq
        lines.append(f"{e.level},{freq_hz!r},{e.period},{e.folds},{e.amplitude!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _resolve_space(cfg: RunConfig) -> SearchSpace:
    return cfg.tpe.space if cfg.tpe.space is not None else default_search_space()


def cmd_tune(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    budget = args.budget if args.budget is not None else cfg.tpe.budget
    if budget < 1:
        raise ConfigError("tuning budget must be >= 1")
    frame = build_frame(cfg.data)
    tr, te, va, stats = prepare_splits(frame, cfg.split)
    tr_std, va_std = standardize(tr, stats), standardize(va, stats)
    space = _resolve_space(cfg)
    objective = make_objective(cfg, frame.channels, tr_std, va_std)
    best_point, best_loss, history = optimize(
        objective, space, budget=budget, seed=cfg.tpe.seed,
        n_candidates=cfg.tpe.n_candidates, n_startup=cfg.tpe.n_startup,
        gamma=cfg.tpe.gamma, sampler=args.sampler,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    best_payload = {
        "point": {k: list(v) if isinstance(v, tuple) else v
                  for k, v in best_point.items()},
        "loss": best_loss,
        "sampler": args.sampler,
        "budget": budget,
        "seed": cfg.tpe.seed,
    }
    (out_dir / "best.json").write_text(json.dumps(best_payload, indent=1,
                                                  sort_keys=True) + "\n")
    (out_dir / "tune_history.csv").write_text(history_to_csv(history, space))
    print(f"best validation loss {best_loss!r} after {budget} trials")
    print(f"wrote {out_dir / 'best.json'} and {out_dir / 'tune_history.csv'}")
    return 0


def _load_hyper_point(path) -> dict:
    payload = json.loads(Path(path).read_text())
    point = payload["point"] if "point" in payload else payload
    return {k: tuple(v) if isinstance(v, list) else v for k, v in point.items()}


def cmd_train(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    frame = build_frame(cfg.data)
    tr, te, va, stats = prepare_splits(frame, cfg.split)
    net_cfg = _network_config(cfg, frame.channels)
    train_cfg = cfg.train
    if args.hyper:
        net_cfg, train_cfg = apply_point(_load_hyper_point(args.hyper), net_cfg,
                                         train_cfg)
    tr_std, va_std = standardize(tr, stats), standardize(va, stats)
    net = init_network(net_cfg)
    net, history = train(net, tr_std, va_std, train_cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(net, out_dir / "checkpoint.json")
    (out_dir / "loss_history.csv").write_text(losses_to_csv(history))
    print(f"trained {len(history)} epochs; best val loss "
          f"{min(h.val_loss for h in history)!r}")
    print(f"wrote {out_dir / 'checkpoint.json'} and {out_dir / 'loss_history.csv'}")
    return 0


def cmd_forecast(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    net = load_checkpoint(args.checkpoint)
    frame = build_frame(cfg.data)
    if net.config.input_channels != frame.channels:
        raise ConfigError(
            f"checkpoint expects {net.config.input_channels} channels but the "
            f"data has {frame.channels}"
        )
    tr, _, _, stats = prepare_splits(frame, cfg.split)
    window_len = net.config.window_len
    if frame.length < window_len:
        raise ConfigError("series shorter than the model window")
    window = stats.apply(frame.values[-window_len:])
    result = forecast_recursive(net, window, args.horizon)
    preds = stats.invert(result.predictions)
    lines = ["step," + ",".join(frame.channel_names)]
    for g in range(args.horizon):
        cells = ",".join(repr(float(v)) for v in preds[g])
        lines.append(f"{g + 1},{cells}")
    text = "\n".join(lines) + "\n"
    Path(args.out).write_text(text)
    print(f"wrote {args.horizon}-step forecast to {args.out}")
    return 0


def _evaluate_to_text(cfg: RunConfig, frame, reports) -> str:
    lines = [f"config: {_config_echo(cfg)}", f"seed: {cfg.train.seed}"]
    for report in reports:
        lines.append(f"horizon {report.horizon} (origins={report.n_origins})")
        lines.append("  channel      mae          mse          rmse         mape")
        for name, ch in zip(report.channel_names, report.per_channel):
            lines.append(f"  {name:10s} {ch.mae:<12.6g} {ch.mse:<12.6g} "
                         f"{ch.rmse:<12.6g} {ch.mape:<12.6g}")
        avg = report.averages
        lines.append(f"  {'avg':10s} {avg.mae:<12.6g} {avg.mse:<12.6g} "
                     f"{avg.rmse:<12.6g} {avg.mape:<12.6g}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    if args.baseline is None and args.checkpoint is None:
        raise ConfigError("provide --checkpoint or --baseline persistence")
    frame = build_frame(cfg.data)
    tr, te, va, stats = prepare_splits(frame, cfg.split)
    if args.baseline == "persistence":
        net, used_stats, window_len = None, None, args.window_len
    else:
        net = load_checkpoint(args.checkpoint)
        if net.config.input_channels != frame.channels:
            raise ConfigError(
                f"checkpoint expects {net.config.input_channels} channels but "
                f"the data has {frame.channels}"
            )
        used_stats, window_len = stats, net.config.window_len
    horizons = (tuple(int(h) for h in args.horizons.split(","))
                if args.horizons else cfg.evaluate.horizons)
    reports = [
        evaluate(net, te, horizon, window_len, stats=used_stats,
                 origin_stride=cfg.evaluate.origin_stride)
        for horizon in horizons
    ]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.txt").write_text(_evaluate_to_text(cfg, frame, reports))
    for report in reports:
        (out_dir / f"metrics_h{report.horizon}.csv").write_text(
            metrics_to_csv(report.channel_names, report.per_channel))
    if args.emit_plot_data:
        for horizon in horizons:
            _emit_plot_data(out_dir, net, te, horizon, window_len, used_stats)
    print((out_dir / "metrics.txt").read_text(), end="")
    return 0


def _emit_plot_data(out_dir: Path, net, te, horizon, window_len, stats):
    from .training import persistence_forecast

    window = te.values[:window_len]
    observed = te.values[window_len:window_len + horizon]
    if net is None:
        preds = persistence_forecast(window, horizon).predictions
    else:
        rolled = forecast_recursive(net, stats.apply(window), horizon)
        preds = stats.invert(rolled.predictions)
    names = te.channel_names
    header = "step," + ",".join(f"observed_{n}" for n in names) + "," + \
        ",".join(f"forecast_{n}" for n in names)
    lines = [header]
    for g in range(min(horizon, observed.shape[0])):
        obs = ",".join(repr(float(v)) for v in observed[g])
        fc = ",".join(repr(float(v)) for v in preds[g])
        lines.append(f"{g + 1},{obs},{fc}")
    (out_dir / f"plot_h{horizon}.csv").write_text("\n".join(lines) + "\n")


def _ablate_variant_metrics(cfg: RunConfig, frame, variant_idx: int,
                            extractor: str, tuner: str | None, rep: int):
    """One (variant, seed) cell: optional tuning, final train, test metrics."""
    tr, te, va, stats = prepare_splits(frame, cfg.split)
    tr_std, va_std = standardize(tr, stats), standardize(va, stats)
    offset = 1000 * rep + 10 * variant_idx
    net_cfg = _network_config(cfg, frame.channels, extractor=extractor,
                              seed=int(cfg.network.get("seed", 0)) + offset)
    train_cfg = replace(cfg.train, seed=cfg.train.seed + offset)
    if tuner is not None:
        space = _resolve_space(cfg)

        def objective(point):
            ncfg, tcfg = apply_point(point, net_cfg, train_cfg)
            try:
                return _train_and_validate(ncfg, tcfg, tr_std, va_std,
                                           cfg.train.horizon,
                                           cfg.evaluate.origin_stride)
            except (RuntimeError, FloatingPointError):
                return float("inf")

        best_point, _, _ = optimize(
            objective, space, budget=cfg.tpe.budget, seed=cfg.tpe.seed + offset,
            n_candidates=cfg.tpe.n_candidates, n_startup=cfg.tpe.n_startup,
            gamma=cfg.tpe.gamma, sampler=tuner,
        )
        net_cfg, train_cfg = apply_point(best_point, net_cfg, train_cfg)
    net = init_network(net_cfg)
    net, _ = train(net, tr_std, va_std, train_cfg)
    out = {}
    for horizon in cfg.evaluate.horizons:
        report = evaluate(net, te, horizon, net_cfg.window_len, stats=stats,
                          origin_stride=cfg.evaluate.origin_stride)
        avg = report.averages
        out[horizon] = (avg.mae, avg.mse, avg.rmse, avg.mape)
    return out


def cmd_ablate(args) -> int:
    cfg = load_config(args.config, seed_override=args.seed)
    datasets = [("clean", build_frame(cfg.data, with_inject=False))]
    if cfg.data.inject:
        datasets.append(("injected", build_frame(cfg.data, with_inject=True)))
    rows = []
    for ds_name, frame in datasets:
        for vi, (vname, extractor, tuner) in enumerate(ABLATION_VARIANTS):
            per_h = {h: [] for h in cfg.evaluate.horizons}
            for rep in range(args.seeds):
                cell = _ablate_variant_metrics(cfg, frame, vi, extractor, tuner, rep)
                for h, values in cell.items():
                    per_h[h].append(values)
            for h, values in per_h.items():
                med = np.median(np.asarray(values), axis=0)
                rows.append((ds_name, vname, h, *(float(m) for m in med)))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["dataset,variant,horizon,mae,mse,rmse,mape"]
    for ds_name, vname, h, mae, mse, rmse, mape in rows:
        lines.append(f"{ds_name},{vname},{h},{mae!r},{mse!r},{rmse!r},{mape!r}")
    text = "\n".join(lines) + "\n"
    (out_dir / "ablate_report.csv").write_text(text)
    print(text, end="")
    print(f"wrote {out_dir / 'ablate_report.csv'}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecast",
        description="Multi-period time series forecasting: wavelet period "
                    "extraction, 2D-folded convolutions, TPE search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kwargs):
        return sub.add_parser(
            name, formatter_class=argparse.ArgumentDefaultsHelpFormatter, **kwargs)

    p = add_parser("synth", help="generate a synthetic multi-period CSV")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--periods", required=True, help="comma-separated, in samples")
    p.add_argument("--amps", required=True, help="comma-separated amplitudes")
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--channels", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-center", help="comma-separated burst centers")
    p.add_argument("--inject-width", help="comma-separated burst widths")
    p.add_argument("--inject-period", help="comma-separated burst periods")
    p.add_argument("--inject-amp", help="comma-separated burst amplitudes")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = add_parser("preprocess", help="impute missing values and denoise")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--freq", type=float, default=1.0, help="sampling frequency, Hz")
    p.add_argument("--taps", type=int, default=8)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--no-denoise", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = add_parser("periods", help="extract dominant periods from a CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--freq", type=float, default=1.0)
    p.add_argument("--basis", default="haar", choices=["haar", "db2", "db4", "sym4"])
    p.add_argument("--top-k", type=int, default=2)
    p.add_argument("--fft", action="store_true", help="use the FFT selector")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_periods)

    p = add_parser("tune", help="TPE hyperparameter search")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override model/train/tuner seeds")
    p.add_argument("--budget", type=int)
    p.add_argument("--sampler", default="tpe", choices=["tpe", "random"])
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_tune)

    p = add_parser("train", help="train a network on the configured data")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override model/train/tuner seeds")
    p.add_argument("--hyper", help="best.json from the tune step")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_train)

    p = add_parser("forecast", help="recursive multi-step forecast")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override model/train/tuner seeds")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("-o", "--out", default="forecast.csv")
    p.set_defaults(func=cmd_forecast)

    p = add_parser("evaluate", help="metrics over the test split")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override model/train/tuner seeds")
    p.add_argument("--checkpoint")
    p.add_argument("--baseline", choices=["persistence"])
    p.add_argument("--horizons", help="comma-separated, default from config")
    p.add_argument("--window-len", type=int, default=64,
                   help="window length for the persistence baseline")
    p.add_argument("--emit-plot-data", action="store_true")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_evaluate)

    p = add_parser("ablate", help="extractor/tuner ablation grid")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override model/train/tuner seeds")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
