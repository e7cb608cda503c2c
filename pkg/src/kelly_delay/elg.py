"""Expected logarithmic growth estimators.

``g(K) = (1/n) E[log(V(n, K)/V(0))]`` in nats per stage, evaluated three ways:

* :func:`elg_exact` -- sum over all ``2^n`` lattice paths;
* :func:`elg_closed_form_bh_delay` -- binomial sum for the delayed
  buy-and-holder;
* :func:`elg_monte_carlo` / :func:`elg_paired_difference` -- sampled paths.

Monte-Carlo paths are processed in fixed-size chunks keyed by path index.
Each chunk reduces to correctly rounded partial sums (``math.fsum``), and the
partials are combined in chunk order. The result therefore does not depend on
the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .dynamics import Delay, Strategy, TradeConfig, log_growth
from .returns import (
    DEFAULT_ENUMERATION_CAP,
    BinaryLattice,
    ReturnModel,
    enumerate_blocks,
    sample_block,
)

EXACT = "exact"
CLOSED_FORM = "closed_form"
MONTE_CARLO = "monte_carlo"

DEFAULT_CHUNK = 4096


@dataclass(frozen=True)
class ElgEstimate:
    value: float
    method: str
    std_error: float = 0.0
    num_paths: int = 0
    ruined: bool = False

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")
        if self.method != MONTE_CARLO and self.std_error != 0:
            raise ValueError("deterministic estimates carry no standard error")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class PairedDifference:
    """Common-random-number estimate of ``g_a - g_b``."""

    value: float
    std_error: float
    num_paths: int
    mean_a: float
    mean_b: float
    ruined: bool = False

    def __iter__(self):
        return iter((self.value, self.std_error))

    @property
    def z_score(self) -> float:
        if self.std_error == 0:
            return math.copysign(math.inf, self.value) if self.value else 0.0
        return self.value / self.std_error


# -- exact ------------------------------------------------------------------


def elg_exact(model: BinaryLattice, cfg: TradeConfig, cap: int = DEFAULT_ENUMERATION_CAP) -> ElgEstimate:
    """Exact ``g(K)`` by enumerating every up/down path of the lattice."""
    partials = []
    ruined = False
    for X, probs in enumerate_blocks(model, cfg.n, cap=cap):
        lg, bad = log_growth(X, cfg)
        live = probs > 0
        if np.any(bad & live):
            ruined = True
            break
        partials.append(math.fsum(probs[live] * lg[live]))
    value = -math.inf if ruined else math.fsum(partials)
    return ElgEstimate(value, EXACT, num_paths=1 << cfg.n, ruined=ruined)


# -- closed form ------------------------------------------------------------


def binomial_weights(m: int, p: float) -> np.ndarray:
    """``C(m, i) p^i (1-p)^(m-i)`` for ``i = 0..m``, computed in log space."""
    i = np.arange(m + 1)
    log_w = gammaln(m + 1) - gammaln(i + 1) - gammaln(m - i + 1) + xlogy(i, p) + xlog1py(m - i, -p)
    return np.exp(log_w)


def elg_closed_form_bh_delay(model: BinaryLattice, n: int, K: float) -> ElgEstimate:
    """Delayed buy-and-hold ELG as two binomial sums.

    Conditioning on the first return (which scales the filled position by
    ``1 + X(0)``) and on the number ``i`` of up-moves among the remaining
    ``n-1`` stages, the compound return after the fill is
    ``z_i = (1+x_max)^i (1+x_min)^(n-1-i) - 1``.

    A group is counted as ruined if its worst ordering (all down-moves first)
    drives the account to zero or below, which can only happen when
    ``K (1 + x_max) > 1``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    m = n - 1
    i = np.arange(m + 1)
    w = binomial_weights(m, model.p)
    z = (1.0 + model.x_max) ** i * (1.0 + model.x_min) ** (m - i) - 1.0
    trough = (1.0 + model.x_min) ** (m - i) - 1.0

    total = []
    for first, prob in ((model.x_max, model.p), (model.x_min, 1.0 - model.p)):
        if prob == 0:
            continue
        lever = K * (1.0 + first)
        live = w > 0
        if np.any(live & (1.0 + lever * trough <= 0)):
            return ElgEstimate(-math.inf, CLOSED_FORM, ruined=True)
        total.append(prob * math.fsum(w[live] * np.log1p(lever * z[live])))
    return ElgEstimate(math.fsum(total) / n, CLOSED_FORM)


# -- Monte-Carlo ------------------------------------------------------------


def _chunks(num_paths: int, chunk: int):
    return [(s, min(s + chunk, num_paths)) for s in range(0, num_paths, chunk)]


def _run_chunks(fn, num_paths: int, chunk: int, workers: int):
    spans = _chunks(num_paths, chunk)
    if workers <= 1:
        return [fn(s) for s in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, spans))


def _moments(values: np.ndarray) -> tuple[float, float, int]:
    bad = ~np.isfinite(values)
    if np.any(bad):
        return 0.0, 0.0, int(bad.sum())
    return math.fsum(values), math.fsum(values * values), 0


def _finish(parts, num_paths: int) -> tuple[float, float, bool]:
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    ruined = any(p[2] for p in parts)
    if ruined:
        return -math.inf, 0.0, True
    mean = s1 / num_paths
    var = max(s2 - s1 * s1 / num_paths, 0.0) / (num_paths - 1)
    return mean, math.sqrt(var / num_paths), False


def _check_paths(num_paths: int):
    if num_paths < 2:
        raise ValueError("num_paths must be at least 2")


def elg_monte_carlo(
    model: ReturnModel,
    cfg: TradeConfig,
    num_paths: int,
    seed: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> ElgEstimate:
    """Sample-mean ELG over paths ``0..num_paths-1`` drawn with ``seed``."""
    return elg_monte_carlo_curve(model, cfg, [cfg.K], num_paths, seed, workers, chunk)[0]


def elg_monte_carlo_curve(
    model: ReturnModel,
    cfg: TradeConfig,
    Ks: Sequence[float],
    num_paths: int,
    seed: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> list[ElgEstimate]:
    """Monte-Carlo ELG at several ``K`` values sharing the same sample paths."""
    _check_paths(num_paths)
    cfgs = [cfg.replace(K=float(K)) for K in Ks]

    def work(span):
        X = sample_block(model, cfg.n, seed, *span)
        return [_moments(log_growth(X, c)[0]) for c in cfgs]

    parts = _run_chunks(work, num_paths, chunk, workers)
    out = []
    for j in range(len(cfgs)):
        mean, se, ruined = _finish([p[j] for p in parts], num_paths)
        out.append(ElgEstimate(mean, MONTE_CARLO, se, num_paths, ruined))
    return out


def elg_paired_difference(
    model: ReturnModel,
    cfg_a: TradeConfig,
    cfg_b: TradeConfig,
    num_paths: int,
    seed: int,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> PairedDifference:
    """Estimate ``g_a - g_b`` with both strategies run on the same paths."""
    _check_paths(num_paths)
    if cfg_a.n != cfg_b.n:
        raise ValueError("paired configurations must share the horizon n")

    def work(span):
        X = sample_block(model, cfg_a.n, seed, *span)
        a = log_growth(X, cfg_a)[0]
        b = log_growth(X, cfg_b)[0]
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            return (0.0, 0.0, 1), _moments(a), _moments(b)
        return _moments(a - b), _moments(a), _moments(b)

    parts = _run_chunks(work, num_paths, chunk, workers)
    diff, se, ruined = _finish([p[0] for p in parts], num_paths)
    mean_a = _finish([p[1] for p in parts], num_paths)[0]
    mean_b = _finish([p[2] for p in parts], num_paths)[0]
    if ruined:
        diff = math.nan
    return PairedDifference(diff, se, num_paths, mean_a, mean_b, ruined)


# -- evaluator objects used by the optimiser ---------------------------------


class ExactEvaluator:
    deterministic = True

    def __init__(self, model: BinaryLattice, cfg: TradeConfig, cap: int = DEFAULT_ENUMERATION_CAP):
        self.model, self.cfg, self.cap = model, cfg, cap

    def __call__(self, K: float) -> ElgEstimate:
        return elg_exact(self.model, self.cfg.replace(K=float(K)), cap=self.cap)


class ClosedFormEvaluator:
    """Delayed buy-and-hold ELG via :func:`elg_closed_form_bh_delay`."""

    deterministic = True

    def __init__(self, model: BinaryLattice, n: int):
        self.model, self.n = model, n

    def __call__(self, K: float) -> ElgEstimate:
        return elg_closed_form_bh_delay(self.model, self.n, float(K))


class MonteCarloEvaluator:
    deterministic = False

    def __init__(self, model: ReturnModel, cfg: TradeConfig, num_paths: int, seed: int,
                 workers: int = 1, chunk: int = DEFAULT_CHUNK):
        self.model, self.cfg = model, cfg
        self.num_paths, self.seed = num_paths, seed
        self.workers, self.chunk = workers, chunk

    def __call__(self, K: float) -> ElgEstimate:
        return self.many([K])[0]

    def many(self, Ks: Sequence[float]) -> list[ElgEstimate]:
        return elg_monte_carlo_curve(
            self.model, self.cfg, Ks, self.num_paths, self.seed, self.workers, self.chunk
        )


def evaluator_for(model: ReturnModel, cfg: TradeConfig, num_paths: int | None = None,
                  seed: int = 0, workers: int = 1):
    """Pick the cheapest accurate evaluator for a configuration.

    Delayed buy-and-hold on a lattice uses the closed form; other lattice
    configurations are enumerated when the horizon is small (or when no
    Monte-Carlo budget is given and the horizon is within the enumeration
    cap); everything else falls back to Monte-Carlo.
    """
    lattice = isinstance(model, BinaryLattice)
    if lattice and cfg.strategy is Strategy.BUY_AND_HOLD and cfg.delay is Delay.ONE_STEP:
        return ClosedFormEvaluator(model, cfg.n)
    if lattice and (cfg.n <= 12 or (num_paths is None and cfg.n <= DEFAULT_ENUMERATION_CAP)):
        return ExactEvaluator(model, cfg)
    if num_paths is None:
        raise ValueError("a Monte-Carlo budget is needed for this configuration")
    return MonteCarloEvaluator(model, cfg, num_paths, seed, workers)
