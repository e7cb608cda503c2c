"""Tick-data ingestion: parse ``timestamp,price`` records, subsample by an
execution delay ``delta_t`` and build the empirical return PMF."""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from .returns import EmpiricalPMF, ModelError


class TickFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class TickSeries:
    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=float)
        s = np.asarray(self.prices, dtype=float)
        if t.shape != s.shape or t.ndim != 1:
            raise TickFormatError("timestamps and prices must be 1-d arrays of equal length")
        back = np.flatnonzero(np.diff(t) < 0)
        if back.size:
            raise TickFormatError("timestamps must be nondecreasing", line=int(back[0]) + 2)
        bad = np.flatnonzero(~(s > 0))
        if bad.size:
            raise TickFormatError("prices must be strictly positive", line=int(bad[0]) + 1)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "prices", s)

    def __len__(self):
        return len(self.timestamps)


@dataclass(frozen=True)
class SubsampledSeries:
    indices: np.ndarray
    returns: np.ndarray
    delta_t: float


def parse_ticks(stream) -> TickSeries:
    """Read ``timestamp,price`` lines from a string or text stream.

    Blank lines, ``#`` comments and a non-numeric header line are skipped.
    Line numbers in errors are 1-based physical line numbers.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    times, prices = [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise TickFormatError(f"expected 'timestamp,price', got {raw.strip()!r}", lineno)
        try:
            t, s = float(parts[0]), float(parts[1])
        except ValueError:
            if not times and lineno == 1:
                continue  # header
            raise TickFormatError(f"non-numeric field in {raw.strip()!r}", lineno) from None
        if not np.isfinite(t) or not np.isfinite(s):
            raise TickFormatError("non-finite value", lineno)
        if times and t < times[-1][0]:
            raise TickFormatError(f"timestamp {t} precedes previous {times[-1][0]}", lineno)
        if s <= 0:
            raise TickFormatError(f"nonpositive price {s}", lineno)
        times.append((t, lineno))
        prices.append(s)
    return TickSeries(np.array([t for t, _ in times]), np.array(prices))


def read_ticks(path: str | os.PathLike) -> TickSeries:
    with open(path) as fh:
        return parse_ticks(fh)


def subsample(series: TickSeries, delta_t: float) -> SubsampledSeries:
    """Chain of tick indices spaced at least ``delta_t`` seconds apart.

    Starting at index 0, the next index is the first ``i`` with
    ``t(i) >= t(k) + delta_t`` and ``i > k``. When ``delta_t == 0`` every index
    is kept. Requiring ``i > k`` also covers a ``delta_t`` so small that
    ``t(k) + delta_t`` rounds back to ``t(k)``.
    """
    if delta_t < 0:
        raise ValueError("delta_t must be nonnegative")
    t, s = series.timestamps, series.prices
    if len(t) == 0:
        return SubsampledSeries(np.array([], dtype=int), np.array([]), float(delta_t))
    chain = [0]
    k = 0
    while True:
        nxt = int(np.searchsorted(t, t[k] + delta_t, side="left"))
        nxt = max(nxt, k + 1)
        if nxt >= len(t):
            break
        chain.append(nxt)
        k = nxt
    idx = np.array(chain, dtype=int)
    sel = s[idx]
    return SubsampledSeries(idx, (sel[1:] - sel[:-1]) / sel[:-1], float(delta_t))


def build_pmf(sub: SubsampledSeries) -> EmpiricalPMF:
    """Empirical PMF with weight ``1/m`` per return (``m`` = number of returns)."""
    if len(sub.returns) == 0:
        raise ModelError("at least one return is needed to build a PMF")
    if np.any(sub.returns <= -1):
        raise ModelError("returns must exceed -1")
    return EmpiricalPMF.from_returns(sub.returns)
