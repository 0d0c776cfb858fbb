"""
Where certificate revenue comes from
====================================

Sales tables give, per course offering, completers and buyers of a 100-unit
paper certificate and a 300-unit verified one. These place completers in
three WTP buckets and show how concentrated revenue is across courses.
"""

from importlib.resources import files

from moocpricing.analytics import (
    compare_offerings,
    course_revenue,
    gini,
    infer_wtp_buckets,
    load_sales,
    lorenz_curve,
    payment_rate,
    top_share,
)
from moocpricing.population import simulate_sales

data = files("moocpricing") / "data"

for rec in load_sales(data / "table1_best_selling.csv"):
    b = infer_wtp_buckets(rec)
    print(f"{rec.course_id:<28} V>0: {b.positive:>4}  100<=V<300: {b.mid:>4}  V>=300: {b.high:>4}"
          f"  revenue {course_revenue(b)}")

# the same course offered three times
cmp = compare_offerings(load_sales(data / "table2_repeat_offering.csv"))
print("completers fall each time:", cmp.declining_totals, "| tier mix stable:", cmp.stable_mix)

# payment rate can exceed 1 when payers are not all completers
for rec in load_sales(data / "table3_high_payment_rate.csv"):
    print(f"  {rec.course_id:<28} payment rate {payment_rate(rec):.2f}")

# a simulated catalogue with heavy-tailed course sizes
revenues = [course_revenue(infer_wtp_buckets(r)) for r in simulate_sales(1140, seed=2016)]
print(f"gini {gini(revenues):.3f}, top 15% of courses earn {top_share(revenues, 0.15):.1%}")

# a few points on the Lorenz curve
pts = lorenz_curve(revenues)
for q in (0.5, 0.85, 0.95):
    x, y = min(pts, key=lambda pt: abs(pt[0] - q))
    print(f"  bottom {x:.0%} of courses hold {y:.1%} of revenue")
