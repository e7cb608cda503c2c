"""
Three-stage toy market with a one-step delay
============================================

A single risky asset moves up 80% or down 20% with equal probability. Orders
are filled one stage after they are placed, so neither trader can react to the
latest price. We enumerate all eight paths and compare the two traders.
"""

# %%
import numpy as np

from kelly_delay import BinaryLattice, TradeConfig, admissible_interval, elg_exact, maximize
from kelly_delay.elg import ExactEvaluator

model = BinaryLattice(x_max=0.8, x_min=-0.2, p=0.5)
n = 3

# %%
# Without borrowing, the delayed order may not exceed the cash on hand in the
# best case, which caps the fraction at 1/(1 + x_max).
for financing in ("self_financed", "leveraged"):
    interval = admissible_interval(model, "one_step", financing)
    best = {}
    for strategy in ("high_frequency", "buy_and_hold"):
        cfg = TradeConfig(strategy, "one_step", 0.0, n, financing=financing)
        best[strategy] = maximize(ExactEvaluator(model, cfg), interval)
    gap = 100 * (best["buy_and_hold"].g_star / best["high_frequency"].g_star - 1)
    print(f"{financing:>14}: K in [{interval[0]:.4f}, {interval[1]:.4f}]")
    for strategy, res in best.items():
        print(f"{'':>16}{strategy:<15} K*={res.k_star:.4f}  g*={res.g_star:.5f}")
    print(f"{'':>16}buy-and-hold ahead by {gap:.2f}%")

# %%
# The whole ELG curve. Buy-and-hold sits above high-frequency at every
# positive fraction.
Ks = np.linspace(0, 1 / 1.8, 6)
for K in Ks:
    g = [elg_exact(model, TradeConfig(s, "one_step", K, n)).value for s in ("high_frequency", "buy_and_hold")]
    print(f"K={K:.3f}  hf={g[0]:.5f}  bh={g[1]:.5f}")
