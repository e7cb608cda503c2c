"""Experiment drivers: each ``cmd_*`` function returns a JSON-serialisable
report that embeds the :class:`ExperimentConfig` which produced it.

:func:`rerun` replays a report's embedded config, so a saved report can be
regenerated and compared byte for byte.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import Delay, Financing, Strategy, TradeConfig, admissible_interval
from .elg import (
    ClosedFormEvaluator,
    ExactEvaluator,
    MonteCarloEvaluator,
    elg_exact,
    elg_paired_difference,
)
from .optimize import (
    curve_to_csv,
    margin_pct,
    maximize,
    sweep_probability,
    sweep_to_csv,
)
from .returns import (
    BinaryLattice,
    ReturnModel,
    dumps_model,
    loads_model,
    save_model,
    sufficient_attractiveness_margin,
)
from .ticks import build_pmf, read_ticks, subsample

TOY3_MODEL = BinaryLattice(0.8, -0.2, 0.5)
LATTICE100_MODEL = BinaryLattice(0.02, -0.01, 0.6)

DEFAULT_SEEDS = {
    "lattice100": 20190101,
    "sweep-p": 20190202,
    "verify-maximality": 20190303,
    "tickdata": 20190404,
}

# |difference| must exceed this many standard errors to call a winner
CONCLUSIVE_Z = 3.0
# tolerance on the maximality inequality g_m* <= g_1*
MAXIMALITY_TOL = 1e-9


@dataclass
class ExperimentConfig:
    experiment: str
    model: str | None = None
    n: int | None = None
    delay: str | None = None
    financing: str | None = None
    mc_paths: int | None = None
    seed: int | None = None
    out_dir: str | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out_dir")
        return d


def _fin(x):
    """JSON-safe float (``-inf`` becomes the string ``"-inf"``)."""
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _opt_dict(res) -> dict:
    return {"k_star": res.k_star, "g_star": _fin(res.g_star), "at_boundary": bool(res.at_boundary),
            "std_error": res.std_error}


def _write(out_dir, name: str, text: str):
    if out_dir is None:
        return
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    Path(out_dir, name).write_text(text)


def _finish(cfg: ExperimentConfig, report: dict) -> dict:
    report = {"config": cfg.to_dict(), **report}
    _write(cfg.out_dir, f"{cfg.experiment}.json", dumps_report(report))
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# -- toy3 ---------------------------------------------------------------------


def cmd_toy3(out_dir=None, grid_points: int = 101) -> dict:
    """Three-stage lattice (x_max=0.8, x_min=-0.2, p=1/2) with a one-step delay."""
    model = TOY3_MODEL
    n = 3
    cfg = ExperimentConfig("toy3", dumps_model(model), n, Delay.ONE_STEP.value, None,
                           out_dir=out_dir, params={"grid_points": grid_points})
    rows = {}
    for fin in Financing:
        interval = admissible_interval(model, Delay.ONE_STEP, fin)
        entry = {"interval": list(interval)}
        for strat in Strategy:
            tc = TradeConfig(strat, Delay.ONE_STEP, 0.0, n, financing=fin)
            entry[strat.value] = _opt_dict(maximize(ExactEvaluator(model, tc), interval, grid_points))
            entry[strat.value]["g_at_K0"] = elg_exact(model, tc).value
        entry["gap_pct"] = margin_pct(entry["buy_and_hold"]["g_star"], entry["high_frequency"]["g_star"])
        rows[fin.value] = entry
    return _finish(cfg, {"results": rows})


# -- lattice100 ---------------------------------------------------------------


def cmd_lattice100(mc_paths: int = 500_000, seed: int | None = None, out_dir=None,
                   hf_grid_points: int = 51, bh_grid_points: int = 101, workers: int = 1,
                   n: int = 100) -> dict:
    """The n=100 lattice example: B&H by closed form, HF by Monte-Carlo."""
    if mc_paths < 10_000:
        raise ValueError("lattice100 needs at least 10^4 Monte-Carlo paths")
    seed = DEFAULT_SEEDS["lattice100"] if seed is None else seed
    model = LATTICE100_MODEL
    cfg = ExperimentConfig("lattice100", dumps_model(model), n, Delay.ONE_STEP.value, None,
                           mc_paths, seed, out_dir,
                           {"hf_grid_points": hf_grid_points, "bh_grid_points": bh_grid_points})
    results = {}
    for fin in Financing:
        interval = admissible_interval(model, Delay.ONE_STEP, fin)
        bh_cfg = TradeConfig(Strategy.BUY_AND_HOLD, Delay.ONE_STEP, 0.0, n, financing=fin)
        hf_cfg = bh_cfg.replace(strategy=Strategy.HIGH_FREQUENCY)
        bh = maximize(ClosedFormEvaluator(model, n), interval, bh_grid_points)
        hf = maximize(MonteCarloEvaluator(model, hf_cfg, mc_paths, seed, workers), interval, hf_grid_points)
        diff = elg_paired_difference(model, bh_cfg.replace(K=bh.k_star), hf_cfg.replace(K=hf.k_star),
                                     mc_paths, seed, workers)
        _write(out_dir, f"lattice100_{fin.value}_bh.csv", curve_to_csv(bh.curve))
        _write(out_dir, f"lattice100_{fin.value}_hf.csv", curve_to_csv(hf.curve))
        results[fin.value] = {
            "interval": list(interval),
            "buy_and_hold": _opt_dict(bh),
            "high_frequency": _opt_dict(hf),
            "paired_difference": {
                "value": diff.value, "std_error": diff.std_error, "z": diff.z_score,
                "margin_pct": 100.0 * diff.value / diff.mean_b,
                "verdict": conclusiveness(diff.value, diff.std_error),
            },
            "margin_pct_from_optima": margin_pct(bh.g_star, hf.g_star),
        }
    return _finish(cfg, {"results": results})


# -- sweep-p --------------------------------------------------------------------


def cmd_sweep_p(p_grid=None, n: int = 100, mc_paths: int | None = 100_000, seed: int | None = None,
                out_dir=None, financing=Financing.SELF_FINANCED, delay=Delay.ONE_STEP,
                x_max: float = 0.02, x_min: float = -0.01, grid_points: int = 21,
                workers: int = 1) -> dict:
    seed = DEFAULT_SEEDS["sweep-p"] if seed is None else seed
    if p_grid is None:
        p_grid = [round(0.4 + 0.05 * i, 2) for i in range(11)]
    template = BinaryLattice(x_max, x_min, 0.5)
    cfg = ExperimentConfig("sweep-p", dumps_model(template), n, Delay(delay).value,
                           Financing(financing).value, mc_paths, seed, out_dir,
                           {"p_grid": list(map(float, p_grid)), "grid_points": grid_points})
    rows = sweep_probability(template, p_grid, n, delay, financing, mc_paths, seed, grid_points, workers)
    _write(out_dir, "sweep-p.csv", sweep_to_csv(rows))
    table = [{"p": r.p, "g_bh": r.g_bh, "g_hf": r.g_hf, "margin_pct": r.margin_pct,
              "k_bh": r.k_bh, "k_hf": r.k_hf, "hf_std_error": r.hf_std_error,
              "margin_std_error": r.margin_std_error} for r in rows]
    return _finish(cfg, {"table": table})


# -- verify-maximality ------------------------------------------------------------


def verify_maximality(model: BinaryLattice, n_max: int, grid_points: int = 201) -> dict:
    """Check ``g_m* <= g_1*`` (no delay) for every horizon ``m = 1..n_max``.

    ``g_m*`` is the buy-and-holder's optimum with horizon ``m`` and ``g_1*``
    the high-frequency optimum. When the model is sufficiently attractive the
    two must coincide.
    """
    interval = (0.0, 1.0)
    attractive = sufficient_attractiveness_margin(model) <= 1.0
    hf_cfg = TradeConfig(Strategy.HIGH_FREQUENCY, Delay.NONE, 0.0, 1)
    hf = maximize(ExactEvaluator(model, hf_cfg), interval, grid_points)
    rows, violations = [], []
    for m in range(1, n_max + 1):
        bh_cfg = TradeConfig(Strategy.BUY_AND_HOLD, Delay.NONE, 0.0, m)
        bh = maximize(ExactEvaluator(model, bh_cfg), interval, grid_points)
        gap = bh.g_star - hf.g_star
        rows.append({"m": m, "k_bh": bh.k_star, "g_bh": bh.g_star, "k_hf": hf.k_star,
                     "g_hf": hf.g_star, "gap": gap})
        if gap > MAXIMALITY_TOL:
            violations.append({"m": m, "K": bh.k_star, "gap": gap, "kind": "exceeds"})
        elif attractive and abs(gap) > MAXIMALITY_TOL:
            violations.append({"m": m, "K": bh.k_star, "gap": gap, "kind": "not_equal"})
    return {
        "model": dumps_model(model),
        "sufficiently_attractive": attractive,
        "rows": rows,
        "strict_somewhere": any(r["gap"] < -MAXIMALITY_TOL for r in rows),
        "violations": violations,
        "passed": not violations,
    }


def random_lattices(count: int, seed: int) -> list[BinaryLattice]:
    """Randomised valid lattices: ``x_max`` in (0, 1], ``x_min`` in (-0.9, 0), ``p`` in (0.05, 0.95)."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x_max = float(rng.uniform(0.005, 1.0))
        x_min = float(-rng.uniform(0.005, 0.9))
        p = float(rng.uniform(0.05, 0.95))
        out.append(BinaryLattice(x_max, x_min, p))
    return out


def cmd_verify_maximality(model: BinaryLattice | None = None, n_max: int = 8, grid_points: int = 201,
                          random_count: int = 0, seed: int | None = None, out_dir=None) -> dict:
    """Verify the no-delay maximality inequality for one model and/or a random suite."""
    seed = DEFAULT_SEEDS["verify-maximality"] if seed is None else seed
    cfg = ExperimentConfig("verify-maximality", dumps_model(model) if model else None, n_max,
                           Delay.NONE.value, Financing.SELF_FINANCED.value, None, seed, out_dir,
                           {"grid_points": grid_points, "random_count": random_count})
    models = ([model] if model is not None else []) + random_lattices(random_count, seed)
    checks = [verify_maximality(mdl, n_max, grid_points) for mdl in models]
    return _finish(cfg, {"checks": checks, "passed": all(c["passed"] for c in checks)})


# -- tickdata ---------------------------------------------------------------------


def conclusiveness(diff: float, paired_se: float, resolution: float = 0.0) -> str:
    """Name the winner only if ``|diff|`` clears ``CONCLUSIVE_Z`` paired standard
    errors *and* ``CONCLUSIVE_Z`` times the per-strategy Monte-Carlo resolution.

    Common paths make the paired error tiny, so the second condition keeps a
    gap far below what either ELG estimate can resolve from being reported as
    a win.
    """
    if not math.isfinite(diff) or abs(diff) <= CONCLUSIVE_Z * max(paired_se, resolution):
        return "inconclusive"
    return "buy_and_hold" if diff > 0 else "high_frequency"


def compare_on_model(model: ReturnModel, n: int, mc_paths: int, seed: int, grid_points: int = 21,
                     financing=Financing.SELF_FINANCED, workers: int = 1) -> dict:
    """Optimise both delayed traders by Monte-Carlo and compare them on common paths."""
    fin = Financing(financing)
    interval = admissible_interval(model, Delay.ONE_STEP, fin)
    bh_cfg = TradeConfig(Strategy.BUY_AND_HOLD, Delay.ONE_STEP, 0.0, n, financing=fin)
    hf_cfg = bh_cfg.replace(strategy=Strategy.HIGH_FREQUENCY)
    bh = maximize(MonteCarloEvaluator(model, bh_cfg, mc_paths, seed, workers), interval, grid_points)
    hf = maximize(MonteCarloEvaluator(model, hf_cfg, mc_paths, seed, workers), interval, grid_points)
    diff = elg_paired_difference(model, bh_cfg.replace(K=bh.k_star), hf_cfg.replace(K=hf.k_star),
                                 mc_paths, seed, workers)
    resolution = math.hypot(bh.std_error, hf.std_error)
    return {
        "interval": list(interval),
        "buy_and_hold": _opt_dict(bh),
        "high_frequency": _opt_dict(hf),
        "paired_difference": {"value": diff.value, "std_error": diff.std_error},
        "resolution": resolution,
        "verdict": conclusiveness(diff.value, diff.std_error, resolution),
        "curves": {"buy_and_hold": bh.curve, "high_frequency": hf.curve},
    }


def cmd_tickdata(file, delta_t: float = 1.0, n: int = 100, mc_paths: int = 50_000,
                 seed: int | None = None, out_dir=None, grid_points: int = 21,
                 workers: int = 1) -> dict:
    seed = DEFAULT_SEEDS["tickdata"] if seed is None else seed
    series = read_ticks(file)
    sub = subsample(series, delta_t)
    pmf = build_pmf(sub)
    cfg = ExperimentConfig("tickdata", None, n, Delay.ONE_STEP.value, Financing.SELF_FINANCED.value,
                           mc_paths, seed, out_dir,
                           {"file": os.fspath(file), "delta_t": delta_t, "grid_points": grid_points})
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        save_model(pmf, Path(out_dir, "tickdata_pmf.csv"))
    result = compare_on_model(pmf, n, mc_paths, seed, grid_points, workers=workers)
    curves = result.pop("curves")
    _write(out_dir, "tickdata_bh.csv", curve_to_csv(curves["buy_and_hold"]))
    _write(out_dir, "tickdata_hf.csv", curve_to_csv(curves["high_frequency"]))
    gaps = np.diff(series.timestamps[sub.indices])
    summary = {
        "ticks": len(series),
        "selected": int(len(sub.indices)),
        "returns": int(len(sub.returns)),
        "mean_spacing": float(gaps.mean()) if gaps.size else None,
        "atoms": len(pmf.atoms),
    }
    return _finish(cfg, {"data": summary, "results": result})


# -- replay -----------------------------------------------------------------------


def rerun(report: dict, out_dir=None) -> dict:
    """Regenerate a report from its embedded config."""
    c = report["config"]
    p = c["params"]
    exp = c["experiment"]
    if exp == "toy3":
        return cmd_toy3(out_dir, p["grid_points"])
    if exp == "lattice100":
        return cmd_lattice100(c["mc_paths"], c["seed"], out_dir, p["hf_grid_points"], p["bh_grid_points"],
                              n=c["n"])
    if exp == "sweep-p":
        t = loads_model(c["model"])
        return cmd_sweep_p(p["p_grid"], c["n"], c["mc_paths"], c["seed"], out_dir, c["financing"],
                           c["delay"], t.x_max, t.x_min, p["grid_points"])
    if exp == "verify-maximality":
        model = loads_model(c["model"]) if c["model"] else None
        return cmd_verify_maximality(model, c["n"], p["grid_points"], p["random_count"], c["seed"], out_dir)
    if exp == "tickdata":
        return cmd_tickdata(p["file"], p["delta_t"], c["n"], c["mc_paths"], c["seed"], out_dir,
                            p["grid_points"])
    raise ValueError(f"unknown experiment {exp!r}")
