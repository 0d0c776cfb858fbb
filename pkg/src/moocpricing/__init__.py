"""Certificate pricing models for freemium online-course platforms."""

from .analytics import (
    SalesRecord,
    TierPrices,
    WtpBuckets,
    compare_offerings,
    course_revenue,
    gini,
    infer_wtp_buckets,
    load_sales,
    lorenz_curve,
    payment_rate,
    scatter_data,
    top_share,
)
from .budget_choice import (
    MultiCourseUser,
    PriceSchedule,
    PurchaseSelection,
    aggregate_uniform_demand,
    brute_force_purchase,
    optimal_uniform_price,
    solve_user_purchase,
    uniform_price_demand,
    validate_selection,
)
from .errors import AllBelowCostError
from .market_core import (
    DemandCurve,
    Population,
    TieRule,
    UserProfile,
    aggregate_demand,
    demand_curve,
    optimal_price,
    profit,
    social_welfare,
    user_best_response,
    user_net_benefit,
)
from .money import Money
from .population import (
    MultiPopulationSpec,
    PopulationSpec,
    generate_multi_population,
    generate_population,
)
from .stackelberg import (
    EmpiricalSurvival,
    PriceExperiment,
    backward_induction,
    estimate_wtp_survival,
    run_price_experiments,
)

__version__ = "0.1.0"
