"""Tree-structured Parzen estimator for hyperparameter search.

Random startup trials seed the history; afterwards each suggestion splits the
observations at a loss quantile, fits kernel densities to the good and bad
groups (with a uniform prior pseudo-point so neither density can vanish),
draws candidates from the good density, and keeps the candidate with the
largest good/bad density ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GAMMA = 0.25
DEFAULT_STARTUP = 10
DEFAULT_CANDIDATES = 24
NONFINITE_SENTINEL = 1e12
_BANDWIDTH_FLOOR_FRAC = 0.01


@dataclass(frozen=True)
class UniformDim:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: lo must be < hi")

    def contains(self, v):
        return np.isreal(v) and self.lo <= v <= self.hi

    def sample_uniform(self, rng):
        return float(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class LogUniformDim:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError(f"{self.name}: need 0 < lo < hi for log scale")

    def contains(self, v):
        return np.isreal(v) and self.lo <= v <= self.hi

    def sample_uniform(self, rng):
        return float(np.exp(rng.uniform(math.log(self.lo), math.log(self.hi))))


@dataclass(frozen=True)
class IntUniformDim:
    name: str
    lo: int
    hi: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"{self.name}: lo must be < hi")

    def contains(self, v):
        return float(v) == int(v) and self.lo <= v <= self.hi

    def sample_uniform(self, rng):
        return int(rng.integers(self.lo, self.hi + 1))


@dataclass(frozen=True)
class CategoricalDim:
    name: str
    choices: tuple

    def __post_init__(self):
        object.__setattr__(self, "choices", tuple(self.choices))
        if not self.choices:
            raise ValueError(f"{self.name}: choices must be nonempty")

    def contains(self, v):
        return v in self.choices

    def sample_uniform(self, rng):
        return self.choices[int(rng.integers(len(self.choices)))]


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")
        if not self.dims:
            raise ValueError("search space is empty")

    def sample(self, rng) -> dict:
        return {d.name: d.sample_uniform(rng) for d in self.dims}

    def validate_point(self, point: dict):
        if set(point) != {d.name for d in self.dims}:
            raise ValueError("point keys do not match the search space")
        for d in self.dims:
            if not d.contains(point[d.name]):
                raise ValueError(f"value {point[d.name]!r} outside dim {d.name}")


@dataclass(frozen=True)
class TrialRecord:
    point: dict
    loss: float


@dataclass
class TrialHistory:
    records: list = field(default_factory=list)

    def append(self, space: SearchSpace, point: dict, loss: float):
        space.validate_point(point)
        if not math.isfinite(loss):
            raise ValueError("losses must be finite (use the sentinel)")
        self.records.append(TrialRecord(point=dict(point), loss=float(loss)))

    def __len__(self):
        return len(self.records)

    def best(self) -> TrialRecord:
        if not self.records:
            raise ValueError("history is empty")
        losses = [r.loss for r in self.records]
        return self.records[int(np.argmin(losses))]


def split_observations(history: TrialHistory, gamma: float = DEFAULT_GAMMA):
    """Partition points at the gamma-quantile of losses (linear interpolation);
    the good group is never empty."""
    if len(history) < 2:
        raise ValueError("need at least 2 records to split")
    losses = np.array([r.loss for r in history.records])
    y_star = float(np.quantile(losses, gamma))
    good_idx = [i for i, y in enumerate(losses) if y < y_star]
    if not good_idx:
        good_idx = [int(np.argmin(losses))]
    good_set = set(good_idx)
    good = [history.records[i].point for i in good_idx]
    bad = [history.records[i].point for i in range(len(losses)) if i not in good_set]
    return good, bad, y_star


def _norm_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _neighbor_bandwidths(xs, lo, hi):
    """Per-kernel bandwidth: distance to the farther adjacent center, with the
    bounds acting as outer neighbors; clipped to [1% of the range, the range].

    Adaptive widths keep isolated points explorative while letting dense
    clusters sharpen; a single global width stalls the search once
    observations pile up near the running optimum.
    """
    span = hi - lo
    n = xs.shape[0]
    if n == 1:
        bws = np.array([span / 2.0])
    else:
        order = np.argsort(xs, kind="stable")
        sx = xs[order]
        prev_gap = np.empty(n)
        next_gap = np.empty(n)
        prev_gap[0] = sx[0] - lo
        prev_gap[1:] = np.diff(sx)
        next_gap[-1] = hi - sx[-1]
        next_gap[:-1] = np.diff(sx)
        bws = np.empty(n)
        bws[order] = np.maximum(prev_gap, next_gap)
    return np.clip(bws, _BANDWIDTH_FLOOR_FRAC * span, span)


class _ContinuousDensity:
    """Kernel mixture in (possibly log-) transformed coordinates, truncated to
    the bounds, plus one uniform prior component."""

    def __init__(self, values, lo, hi, log_scale):
        self.log_scale = log_scale
        self.lo = math.log(lo) if log_scale else lo
        self.hi = math.log(hi) if log_scale else hi
        xs = np.array([math.log(v) if log_scale else v for v in values], dtype=float)
        self.centers = xs
        self.bandwidths = _neighbor_bandwidths(xs, self.lo, self.hi)
        # kernel mass inside the bounds, for truncation renormalization
        self.masses = np.maximum(
            np.array([
                _norm_cdf((self.hi - c) / b) - _norm_cdf((self.lo - c) / b)
                for c, b in zip(xs, self.bandwidths)
            ]),
            1e-300,
        )

    def _component_pdfs(self, x):
        z = (x - self.centers) / self.bandwidths
        kernel = np.exp(-0.5 * z * z) / (self.bandwidths * math.sqrt(2.0 * math.pi))
        return kernel / self.masses

    def log_pdf(self, value):
        x = math.log(value) if self.log_scale else float(value)
        if not self.lo <= x <= self.hi:
            return -math.inf
        uniform = 1.0 / (self.hi - self.lo)
        total = (self._component_pdfs(x).sum() + uniform) / (self.centers.size + 1)
        return math.log(max(total, 1e-300))

    def sample(self, rng):
        comp = int(rng.integers(self.centers.size + 1))
        if comp == self.centers.size:
            x = float(rng.uniform(self.lo, self.hi))
        else:
            c = self.centers[comp]
            bw = self.bandwidths[comp]
            x = None
            for _ in range(64):
                draw = float(rng.normal(c, bw))
                if self.lo <= draw <= self.hi:
                    x = draw
                    break
            if x is None:
                x = min(max(c, self.lo), self.hi)
        return math.exp(x) if self.log_scale else x


class _CategoricalDensity:
    def __init__(self, values, choices):
        counts = np.array([sum(1 for v in values if v == c) for c in choices],
                          dtype=float)
        self.choices = tuple(choices)
        self.weights = (counts + 1.0) / (counts.sum() + len(choices))

    def log_pdf(self, value):
        return math.log(self.weights[self.choices.index(value)])

    def sample(self, rng):
        return self.choices[int(rng.choice(len(self.choices), p=self.weights))]


@dataclass
class ParzenDensity:
    """Per-dimension density estimates over one observation group."""

    space: SearchSpace
    dims: dict

    def log_density(self, point: dict) -> float:
        return sum(self.dims[d.name].log_pdf(point[d.name]) for d in self.space.dims)

    def sample_point(self, rng) -> dict:
        point = {}
        for d in self.space.dims:
            v = self.dims[d.name].sample(rng)
            if isinstance(d, IntUniformDim):
                v = int(min(max(round(v), d.lo), d.hi))
            point[d.name] = v
        return point


def fit_parzen(points, space: SearchSpace) -> ParzenDensity:
    """One kernel per observed point with neighbor-distance bandwidths floored
    at 1% of the range, add-one smoothing for categorical dims, and a uniform
    prior pseudo-point in every dimension."""
    if not points:
        raise ValueError("need at least one point")
    dims = {}
    for d in space.dims:
        values = [p[d.name] for p in points]
        if isinstance(d, CategoricalDim):
            dims[d.name] = _CategoricalDensity(values, d.choices)
        elif isinstance(d, LogUniformDim):
            dims[d.name] = _ContinuousDensity(values, d.lo, d.hi, log_scale=True)
        else:
            dims[d.name] = _ContinuousDensity(values, d.lo, d.hi, log_scale=False)
    return ParzenDensity(space=space, dims=dims)


def ei_ratio(point: dict, good: ParzenDensity, bad: ParzenDensity) -> float:
    """Good/bad density ratio, computed via log densities."""
    lg = good.log_density(point)
    lb = bad.log_density(point)
    assert lb > -math.inf, "bad density vanished despite the prior pseudo-point"
    return math.exp(min(lg - lb, 700.0))


def suggest(history: TrialHistory, space: SearchSpace, rng,
            n_candidates: int = DEFAULT_CANDIDATES,
            n_startup: int = DEFAULT_STARTUP,
            gamma: float = DEFAULT_GAMMA) -> dict:
    """Next point to evaluate: uniform during startup, then best-EI candidate
    drawn from the good-group density. First-drawn candidate wins ties."""
    if len(history) < max(n_startup, 2):
        return space.sample(rng)
    good_pts, bad_pts, _ = split_observations(history, gamma)
    good = fit_parzen(good_pts, space)
    bad = fit_parzen(bad_pts if bad_pts else good_pts, space)
    candidates = [good.sample_point(rng) for _ in range(n_candidates)]
    scores = np.array([ei_ratio(c, good, bad) for c in candidates])
    return candidates[int(np.argmax(scores))]


def optimize(objective, space: SearchSpace, budget: int, seed: int,
             n_candidates: int = DEFAULT_CANDIDATES,
             n_startup: int = DEFAULT_STARTUP,
             gamma: float = DEFAULT_GAMMA,
             history: TrialHistory | None = None,
             sampler: str = "tpe"):
    """Run ``budget`` suggest/evaluate/record trials; returns
    (best_point, best_loss, history). Non-finite objective values are recorded
    as a large sentinel so the search learns to avoid the region."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if sampler not in ("tpe", "random"):
        raise ValueError(f"unknown sampler {sampler!r}")
    rng = np.random.default_rng(seed)
    if history is None:
        history = TrialHistory()
    for _ in range(budget):
        if sampler == "random":
            point = space.sample(rng)
        else:
            point = suggest(history, space, rng, n_candidates=n_candidates,
                            n_startup=n_startup, gamma=gamma)
        y = float(objective(point))
        if not math.isfinite(y):
            y = NONFINITE_SENTINEL
        history.append(space, point, y)
    best = history.best()
    return best.point, best.loss, history


# ---------------------------------------------------------------------------
# serialization and the default network search space


def history_to_csv(history: TrialHistory, space: SearchSpace) -> str:
    import csv
    import io

    names = [d.name for d in space.dims]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial_index", *names, "loss"])
    for i, rec in enumerate(history.records):
        cells = [str(i)]
        for name in names:
            v = rec.point[name]
            cells.append(repr(v) if isinstance(v, float) else str(v))
        cells.append(repr(rec.loss))
        writer.writerow(cells)
    return buf.getvalue()


def history_from_csv(text: str, space: SearchSpace) -> TrialHistory:
    import csv
    import io

    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    names = [d.name for d in space.dims]
    if rows[0] != ["trial_index", *names, "loss"]:
        raise ValueError("history header does not match the search space")
    by_name = {d.name: d for d in space.dims}
    history = TrialHistory()
    for cells in rows[1:]:
        point = {}
        for name, cell in zip(names, cells[1:-1]):
            d = by_name[name]
            if isinstance(d, CategoricalDim):
                choices_by_str = {str(c): c for c in d.choices}
                point[name] = choices_by_str[cell]
            elif isinstance(d, IntUniformDim):
                point[name] = int(cell)
            else:
                point[name] = float(cell)
        history.append(space, point, float(cells[-1]))
    return history


def default_search_space() -> SearchSpace:
    """The network hyperparameters exposed to the tuner."""
    return SearchSpace(dims=(
        IntUniformDim("top_k", 1, 5),
        CategoricalDim("embed_dim", (16, 32, 64)),
        IntUniformDim("layers", 1, 3),
        LogUniformDim("learning_rate", 1e-4, 1e-2),
        CategoricalDim("basis", ("haar", "db2", "db4", "sym4")),
        CategoricalDim("kernel_sizes", ((1, 3), (1, 3, 5))),
    ))
