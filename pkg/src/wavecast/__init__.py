"""wavecast: multi-period time series forecasting toolkit.

Pipeline: CSV/synthetic ingestion and preprocessing -> wavelet (or FFT)
period extraction -> per-period 2D folding with inception-style convolution
-> recursive multi-step forecasting, with TPE hyperparameter search on top.
"""

from .dataset import (
    ChannelStats,
    SplitRatios,
    SynthSpec,
    TimeSeriesFrame,
    denoise_adaptive,
    destandardize,
    fit_stats,
    impute_missing,
    inject_local_periodicity,
    load_csv,
    save_csv,
    split,
    standardize,
    synth_multiperiod,
)
from .metrics import MetricReport, average_metrics, compute_metrics
from .network import (
    Network,
    NetworkConfig,
    aggregate,
    backward,
    embed,
    forward,
    forward_plan,
    inception_forward,
    init_network,
    load_checkpoint,
    save_checkpoint,
    times_block,
)
from .tensorize import Folded2D, fold, pad_to_multiple, unfold_trunc
from .tpe import (
    CategoricalDim,
    IntUniformDim,
    LogUniformDim,
    SearchSpace,
    TrialHistory,
    UniformDim,
    default_search_space,
    ei_ratio,
    fit_parzen,
    optimize,
    split_observations,
    suggest,
)
from .training import (
    EvaluationReport,
    ForecastResult,
    TrainConfig,
    evaluate,
    forecast_recursive,
    make_windows,
    persistence_forecast,
    train,
)
from .wavelets import (
    BASIS_NAMES,
    PeriodSet,
    WaveletBasis,
    WaveletDecomposition,
    dwt_level,
    dwt_multilevel,
    extract_periods,
    extract_periods_fft,
    get_basis,
    level_amplitudes,
    levels_to_periods,
    select_topk,
)

__version__ = "0.1.0"
