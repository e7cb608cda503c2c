"""Kelly expected-log-growth toolkit for high-frequency versus buy-and-hold
trading, with and without a one-step execution delay."""

from .dynamics import (
    Delay,
    Financing,
    Strategy,
    TradeConfig,
    Trajectory,
    admissible_interval,
    bh_no_delay,
    bh_with_delay,
    check_constraints,
    hf_no_delay,
    hf_with_delay,
    simulate,
)
from .elg import (
    ElgEstimate,
    elg_closed_form_bh_delay,
    elg_exact,
    elg_monte_carlo,
    elg_paired_difference,
)
from .optimize import OptimizationResult, elg_curve, maximize, sweep_probability
from .returns import (
    BinaryLattice,
    EmpiricalPMF,
    ReturnPath,
    attractiveness_threshold,
    enumerate_paths,
    sample_path,
    sufficient_attractiveness_margin,
)
from .ticks import build_pmf, parse_ticks, subsample

__version__ = "0.1.0"
