"""
Learning demand from price experiments
======================================

The platform does not see WTP directly. It posts prices, counts buyers, and
turns those counts into a survival curve ``P(net WTP >= p)``.
"""

import numpy as np

from moocpricing import Money, PopulationSpec, generate_population
from moocpricing.stackelberg import estimate_wtp_survival, run_price_experiments, true_survival

pop = generate_population(PopulationSpec(10_000, seed=2026))

# probe between the 10th and 90th percentile of net WTP
lo, hi = np.quantile(pop.net_wtp_cents, [0.1, 0.9])
prices = [Money(int(round(c))) for c in np.linspace(lo, hi, 12)]
truth = true_survival(pop, prices)

# exact counts recover the curve exactly
exact = estimate_wtp_survival(run_price_experiments(pop, prices))
print("noiseless estimate exact:", list(exact.survival) == truth)

# 10% of decisions replaced by a coin toss
noisy = estimate_wtp_survival(run_price_experiments(pop, prices, noise=0.1, seed=1))
print(f"{'price':>8} {'true':>6} {'noisy':>6}")
for p, t, s in zip(prices, truth, noisy.survival):
    print(f"{str(p):>8} {t:6.3f} {s:6.3f}")

# coin tosses pull every estimate towards 1/2, by noise * |1/2 - S|
gap = max(abs(a - b) for a, b in zip(noisy.survival, truth))
print(f"sup error {gap:.4f}")

# smaller cohorts per probe: sampling error now dominates
small = estimate_wtp_survival(run_price_experiments(pop, prices, sample_size=300, seed=2))
print(f"sup error with 300 users per probe {max(abs(a - b) for a, b in zip(small.survival, truth)):.4f}")
