"""
Buy-and-hold margin as the win probability grows
================================================

For the same +2%/-1% lattice we vary the probability of an up-move and
optimise both delayed traders at every value. Below p = 0.34 the lattice is
not attractive enough for the results to apply, so the sweep starts at 0.4.
"""

# %%
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from kelly_delay import BinaryLattice, attractiveness_threshold, sweep_probability

template = BinaryLattice(0.02, -0.01, 0.5)
print(f"attractiveness threshold p* = {attractiveness_threshold(template):.4f}")
p_grid = np.round(np.arange(0.40, 0.91, 0.05), 2)
out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

# %%
# 20k Monte-Carlo paths per point keep this demo under a minute. The CLI
# default (``kelly-delay sweep-p``) uses 100k.
fig, ax = plt.subplots(figsize=(6, 4))
for financing in ("self_financed", "leveraged"):
    rows = sweep_probability(template, p_grid, 100, financing=financing, mc_paths=20_000,
                             seed=20190202, grid_points=11)
    ax.plot([r.p for r in rows], [r.margin_pct for r in rows], "o-", label=financing.replace("_", " "))
    for r in rows:
        print(f"{financing:>14}  p={r.p:.2f}  margin={r.margin_pct:6.3f}%")
ax.set_xlabel("p")
ax.set_ylabel("(g_bh* - g_hf*) / g_hf*  [%]")
ax.legend()
fig.tight_layout()
fig.savefig(out / "margin_versus_p.png", dpi=120)
