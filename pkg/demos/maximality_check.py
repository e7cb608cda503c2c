"""
No delay, no advantage
======================

When orders fill immediately, holding a position for m stages can never beat
rebalancing every stage. For lattices that are attractive enough the two
optimal growth rates are equal. We check both statements by exact
enumeration.
"""

# %%
from kelly_delay import BinaryLattice, sufficient_attractiveness_margin
from kelly_delay.experiments import random_lattices, verify_maximality

for model in (BinaryLattice(0.02, -0.01, 0.6), BinaryLattice(0.8, -0.2, 0.3)):
    check = verify_maximality(model, n_max=8)
    print(model, f"margin={sufficient_attractiveness_margin(model):.4f}", "passed" if check["passed"] else "FAILED")
    for row in check["rows"]:
        print(f"  m={row['m']}  K_bh*={row['k_bh']:.4f}  g_bh*-g_hf*={row['gap']:+.3e}")

# %%
# A random suite. The largest positive gap should be at rounding level.
checks = [verify_maximality(m, 8, grid_points=101) for m in random_lattices(20, seed=7)]
worst = max(r["gap"] for c in checks for r in c["rows"])
print(f"{sum(c['passed'] for c in checks)}/{len(checks)} passed, largest gap {worst:.2e}")
