"""
Several courses, one budget
===========================

A user facing many courses buys the set with the largest surplus that fits
both their budget and a cap on how many courses they take. Under a single
uniform price the number bought has a closed form.
"""

from moocpricing import Money
from moocpricing.budget_choice import (
    MultiCourseUser,
    PriceSchedule,
    brute_force_purchase,
    optimal_uniform_price,
    solve_user_purchase,
    uniform_price_demand,
    validate_selection,
)
from moocpricing.population import MultiPopulationSpec, generate_multi_population

ada = MultiCourseUser(
    "ada",
    wtp=tuple(Money.of(v) for v in (120, 90, 60, 45, 30)),
    audit=tuple(Money.of(v) for v in (20, 10, 30, 5, 0)),
    budget=Money.of("150"),
    max_courses=3,
)
prices = PriceSchedule(tuple(Money.of(v) for v in (80, 40, 25, 30, 20)))

sel = solve_user_purchase(ada, prices)
print("chosen courses", sel.indices, "spend", sel.total_spend, "surplus", sel.surplus)
print("matches exhaustive search:", sel == brute_force_purchase(ada, prices))
print("constraint violations:", validate_selection(ada, prices, sel) or "none")

# uniform price: min(cap, floor(budget / p), courses worth buying)
for p in ("20", "35", "50", "80"):
    print(f"  uniform price {p:>3}: buys {uniform_price_demand(ada, Money.of(p))}")

# a correlated population of shoppers, and the platform's best uniform price
users = generate_multi_population(MultiPopulationSpec(300, n_courses=6, correlation=0.4, seed=5))
opt = optimal_uniform_price(users, Money.of("2"))
print(f"best uniform price {opt.price}: {opt.certificates_sold} certificates, profit {opt.profit}")
