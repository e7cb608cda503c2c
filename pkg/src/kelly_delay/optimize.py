"""Maximisation of ``g(K)`` over an interval, ELG curves and the ``p`` sweep."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import Delay, Financing, Strategy, TradeConfig, admissible_interval
from .elg import (
    ClosedFormEvaluator,
    ElgEstimate,
    ExactEvaluator,
    MonteCarloEvaluator,
    EXACT,
    elg_paired_difference,
)
from .returns import BinaryLattice, attractiveness_threshold

INV_PHI = (math.sqrt(5) - 1) / 2


class NoAdmissibleK(RuntimeError):
    """Every grid point evaluated to ``-inf`` (all candidate K ruin)."""


@dataclass
class CurvePoint:
    K: float
    g: float
    std_error: float = 0.0


@dataclass
class OptimizationResult:
    k_star: float
    g_star: float
    curve: list = field(default_factory=list)
    at_boundary: bool = False
    std_error: float = 0.0

    def curve_csv(self) -> str:
        return curve_to_csv(self.curve)


def _as_estimate(value) -> ElgEstimate:
    if isinstance(value, ElgEstimate):
        return value
    return ElgEstimate(float(value), EXACT)


def _evaluate_many(evaluator: Callable, Ks: Sequence[float]) -> list[ElgEstimate]:
    many = getattr(evaluator, "many", None)
    if many is not None:
        return [_as_estimate(e) for e in many(list(Ks))]
    return [_as_estimate(evaluator(K)) for K in Ks]


def _is_deterministic(evaluator) -> bool:
    return getattr(evaluator, "deterministic", True)


def elg_curve(evaluator: Callable, interval: tuple[float, float], num_points: int) -> list[CurvePoint]:
    """Evaluate ``g`` on ``num_points`` evenly spaced K values, endpoints included."""
    if num_points < 2:
        raise ValueError("num_points must be at least 2")
    lo, hi = interval
    Ks = np.linspace(lo, hi, num_points)
    return [CurvePoint(float(K), e.value, e.std_error) for K, e in zip(Ks, _evaluate_many(evaluator, Ks))]


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6):
    """Golden-section search for the maximum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x))`` for the best point visited once the bracket is no
    wider than ``tol``.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = max((fc, -c, c), (fd, -d, d))
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            best = max(best, (fc, -c, c))
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            best = max(best, (fd, -d, d))
    return best[2], best[0]


def maximize(
    evaluator: Callable,
    interval: tuple[float, float],
    grid_points: int = 101,
    refine_tol: float = 1e-6,
) -> OptimizationResult:
    """Grid scan of ``interval`` followed by golden-section refinement.

    Refinement runs on the bracket around the best grid point and only for
    deterministic evaluators. Monte-Carlo evaluators (``deterministic = False``)
    get the grid argmax. Ties go to the smaller K.
    """
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    lo, hi = interval
    if not lo <= hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    curve = elg_curve(evaluator, interval, grid_points)
    g = np.array([pt.g for pt in curve])
    if not np.any(np.isfinite(g)):
        raise NoAdmissibleK(f"g(K) = -inf at every grid point in [{lo}, {hi}]")
    i = int(np.argmax(g))
    k_star, g_star, se = curve[i].K, curve[i].g, curve[i].std_error

    if _is_deterministic(evaluator) and hi > lo:
        a = curve[max(i - 1, 0)].K
        b = curve[min(i + 1, grid_points - 1)].K
        k_ref, g_ref = golden_section_max(lambda K: _as_estimate(evaluator(K)).value, a, b, refine_tol)
        if g_ref > g_star:
            k_star, g_star = k_ref, g_ref

    return OptimizationResult(
        k_star=k_star,
        g_star=g_star,
        curve=curve,
        at_boundary=k_star >= hi - refine_tol,
        std_error=se,
    )


def curve_to_csv(curve: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["K", "g", "std_err"])
    for pt in curve:
        w.writerow([repr(pt.K), repr(pt.g), repr(pt.std_error)])
    return buf.getvalue()


# -- probability sweep --------------------------------------------------------


@dataclass
class SweepRow:
    p: float
    g_bh: float
    g_hf: float
    margin_pct: float
    k_bh: float
    k_hf: float
    hf_std_error: float = 0.0
    margin_std_error: float = 0.0


def margin_pct(g_bh: float, g_hf: float) -> float:
    """Buy-and-hold's percentage ELG advantage ``(g_bh - g_hf)/g_hf * 100``."""
    return (g_bh - g_hf) / g_hf * 100.0


def _bh_evaluator(model: BinaryLattice, cfg: TradeConfig):
    if cfg.delay is Delay.ONE_STEP:
        return ClosedFormEvaluator(model, cfg.n)
    return ExactEvaluator(model, cfg)


def sweep_probability(
    lattice_template: BinaryLattice,
    p_values: Sequence[float],
    n: int,
    delay=Delay.ONE_STEP,
    financing=Financing.SELF_FINANCED,
    mc_paths: int | None = None,
    seed: int = 0,
    grid_points: int = 101,
    workers: int = 1,
) -> list[SweepRow]:
    """Optimise both traders for each ``p`` and report the margin of victory.

    The buy-and-holder uses the closed form (delayed) or enumeration. The
    high-frequency trader uses exact enumeration when ``mc_paths`` is ``None``
    and Monte-Carlo otherwise, with the same ``seed`` at every ``p``.

    In Monte-Carlo mode the margin is a paired estimate: both traders run at
    their optimal fractions on the same paths and the mean log-growth gap is
    divided by the high-frequency mean. Comparing the exact ``g_bh`` with an
    independent ``g_hf`` estimate would leave the full sampling error of
    ``g_hf`` in a margin that is only a percent or so of it.
    """
    delay, financing = Delay(delay), Financing(financing)
    threshold = attractiveness_threshold(lattice_template)
    rows = []
    for p in p_values:
        if not threshold < p < 1:
            raise ValueError(f"p={p} outside ({threshold:.6g}, 1)")
        model = lattice_template.with_p(float(p))
        interval = admissible_interval(model, delay, financing)
        base = TradeConfig(Strategy.BUY_AND_HOLD, delay, 0.0, n, financing=financing)
        bh = maximize(_bh_evaluator(model, base), interval, grid_points)
        hf_cfg = base.replace(strategy=Strategy.HIGH_FREQUENCY)
        if mc_paths is None:
            hf_eval = ExactEvaluator(model, hf_cfg)
        else:
            hf_eval = MonteCarloEvaluator(model, hf_cfg, mc_paths, seed, workers)
        hf = maximize(hf_eval, interval, grid_points)
        if mc_paths is None:
            margin, margin_se = margin_pct(bh.g_star, hf.g_star), 0.0
        else:
            diff = elg_paired_difference(model, base.replace(K=bh.k_star), hf_cfg.replace(K=hf.k_star),
                                         mc_paths, seed, workers)
            margin = 100.0 * diff.value / diff.mean_b
            margin_se = 100.0 * diff.std_error / abs(diff.mean_b)
        rows.append(SweepRow(float(p), bh.g_star, hf.g_star, margin, bh.k_star, hf.k_star,
                             hf.std_error, margin_se))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "g_bh", "g_hf", "margin_pct"])
    for r in rows:
        w.writerow([repr(r.p), repr(r.g_bh), repr(r.g_hf), repr(r.margin_pct)])
    return buf.getvalue()
