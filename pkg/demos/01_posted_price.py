"""
Posted-price certificates for a single course
=============================================

Every user either audits for free or pays for a certificate. We draw a
population, find the profit-maximizing price and compare welfare with
pricing at marginal cost.
"""

import numpy as np

from moocpricing import Money, PopulationSpec, generate_population
from moocpricing.market_core import aggregate_demand, demand_curve, optimal_price, social_welfare
from moocpricing.stackelberg import backward_induction

# 5,000 users: WTP is a truncated lognormal, auditing is worth 20% of it
pop = generate_population(PopulationSpec(5000, seed=7))
print("median net WTP:", Money(int(np.median(pop.net_wtp_cents))))

cost = Money.of("5")
best = optimal_price(pop, cost)
print(f"optimal price {best.price}, {best.demand} buyers, profit {best.profit}")

# the same price falls out of leader/follower backward induction
game = backward_induction(pop, cost)
print("backward induction agrees:", (game.leader_price, game.profit) == (best.price, best.profit))

# demand is a step function of price
grid = [Money.of(p) for p in (5, 10, 20, 40, 80, 160)]
curve = demand_curve(pop, grid, cost)
for p, d, pi in zip(curve.prices, curve.demands, curve.profits):
    print(f"  p={p:>7}  demand={d:>5}  profit={pi}")

# welfare peaks when price equals marginal cost
w_cost = social_welfare(pop, cost, cost)
w_opt = social_welfare(pop, best.price, cost)
print(f"welfare at cost {w_cost}, at the profit optimum {w_opt}")
print("buyers at cost:", aggregate_demand(pop, cost))
