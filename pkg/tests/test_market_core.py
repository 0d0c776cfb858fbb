from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moocpricing.errors import AllBelowCostError, EmptyGridError
from moocpricing.market_core import (
    Population,
    TieRule,
    UserProfile,
    aggregate_demand,
    candidate_prices,
    demand_curve,
    optimal_price,
    profit,
    social_welfare,
    user_best_response,
    user_net_benefit,
)
from moocpricing.money import Money

from conftest import populations

WEAK, STRICT = TieRule.WEAK, TieRule.STRICT


def _count_buyers(pop, price_cents, rule):
    # plain loop, independent of the vectorized path
    n = 0
    for u in pop:
        net = u.wtp_verified.cents - u.utility_audit.cents
        n += net >= price_cents if rule is WEAK else net > price_cents
    return n


def _brute_force_best_profit(pop, c_cents):
    """Maximum profit over every cent price above cost up to the top net WTP."""
    top = max(u.wtp_verified.cents - u.utility_audit.cents for u in pop)
    best = (0, None)
    for p in range(c_cents + 1, top + 1):
        value = _count_buyers(pop, p, WEAK) * (p - c_cents)
        if value > best[0]:
            best = (value, p)
    return best


class TestNetBenefit:
    def test_audit_branch(self):
        u = UserProfile("a", 300, 50)
        assert user_net_benefit(u, False, 250) == Decimal("50")

    def test_buy_branch(self):
        u = UserProfile("a", 300, 50)
        assert user_net_benefit(u, True, 250) == Decimal("50")

    def test_negative(self):
        assert user_net_benefit(UserProfile("a", 100, 0), True, 150) == Decimal("-50")


class TestBestResponse:
    def test_buys(self):
        for rule in TieRule:
            assert user_best_response(UserProfile("a", 300, 0), 250, rule)

    def test_declines(self):
        for rule in TieRule:
            assert not user_best_response(UserProfile("a", 300, 100), 250, rule)

    def test_indifference(self):
        u = UserProfile("a", 300, 0)
        assert user_best_response(u, 300, WEAK) is True
        assert user_best_response(u, 300, STRICT) is False

    def test_rule_parsing(self):
        assert TieRule.parse("weak") is TieRule.INDIFFERENT_BUYS
        assert TieRule.parse("STRICT") is TieRule.INDIFFERENT_DECLINES
        with pytest.raises(ValueError):
            TieRule.parse("sometimes")


class TestAggregateDemand:
    def test_example(self, three_users):
        assert aggregate_demand(three_users, 15, WEAK) == 2

    def test_zero_price(self):
        pop = Population.from_values([10, 5, 0], [5, 10, 0])
        assert aggregate_demand(pop, 0, WEAK) == 2

    def test_empty(self):
        assert aggregate_demand(Population(), 10) == 0

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            Population([UserProfile("a", 1, 0), UserProfile("a", 2, 0)])

    @given(populations(), st.integers(0, 6000), st.sampled_from(list(TieRule)))
    def test_matches_loop(self, pop, p, rule):
        assert aggregate_demand(pop, Money(p), rule) == _count_buyers(pop, p, rule)

    @given(populations(), st.integers(0, 6000), st.integers(0, 6000))
    def test_monotone(self, pop, a, b):
        lo, hi = sorted((a, b))
        for rule in TieRule:
            assert aggregate_demand(pop, Money(lo), rule) >= aggregate_demand(pop, Money(hi), rule)

    @given(populations(), st.integers(0, 6000))
    def test_weak_dominates_strict(self, pop, p):
        weak = aggregate_demand(pop, Money(p), WEAK)
        strict = aggregate_demand(pop, Money(p), STRICT)
        assert weak >= strict
        atoms = {int(v) for v in pop.net_wtp_cents}
        if p not in atoms:
            assert weak == strict


class TestProfit:
    def test_example(self, three_users):
        assert profit(three_users, 20, 0) == Decimal("40")

    def test_zero_margin(self, three_users):
        assert profit(three_users, 15, 15) == 0

    def test_no_demand(self, three_users):
        assert profit(three_users, 31, 0) == 0


class TestOptimalPrice:
    def test_example(self, three_users):
        opt = optimal_price(three_users, 0)
        assert (opt.price, opt.profit, opt.demand) == (Money.of(20), Decimal("40"), 2)
        assert not opt.all_below_cost

    def test_single_user(self):
        opt = optimal_price(Population.from_values([70], [20]), 5)
        assert (opt.price, opt.profit, opt.demand) == (Money.of(50), Decimal("45"), 1)

    def test_homogeneous(self):
        opt = optimal_price(Population.from_values([40] * 7), 10)
        assert (opt.price, opt.profit, opt.demand) == (Money.of(40), Decimal("210"), 7)

    def test_tie_goes_to_lowest_price(self):
        # 10 * 2 == 20 * 1
        opt = optimal_price(Population.from_values([10, 20]), 0)
        assert opt.price == Money.of(10)
        assert opt.demand == 2

    def test_all_below_cost(self):
        with pytest.raises(AllBelowCostError) as info:
            optimal_price(Population.from_values([10, 20]), 20)
        flagged = info.value.result
        assert flagged.all_below_cost
        assert (flagged.price, flagged.demand, flagged.profit) == (Money.of(20), 0, 0)

    def test_empty(self):
        with pytest.raises(ValueError):
            optimal_price(Population(), 0)

    def test_strict_rule_best_candidate(self, three_users):
        # strict: at 10 two buyers (20, 30) -> 20; at 20 one buyer -> 20; at 30 none
        opt = optimal_price(three_users, 0, STRICT)
        assert opt.price == Money.of(10)
        assert opt.profit == Decimal("20")

    @settings(max_examples=60)
    @given(populations(max_size=12, max_cents=400), st.integers(0, 200))
    def test_matches_cent_by_cent_search(self, pop, c):
        best_value, _ = _brute_force_best_profit(pop, c)
        try:
            opt = optimal_price(pop, Money(c))
        except AllBelowCostError:
            assert best_value == 0
            return
        assert opt.profit == Decimal(best_value) / 100
        assert opt.price in candidate_prices(pop, Money(c))

    @given(populations(), st.integers(0, 3000))
    def test_beats_every_candidate(self, pop, c):
        try:
            opt = optimal_price(pop, Money(c))
        except AllBelowCostError:
            return
        for p in candidate_prices(pop, Money(c)):
            assert profit(pop, p, Money(c)) <= opt.profit


class TestSocialWelfare:
    def test_example_above_cost(self, welfare_users):
        assert social_welfare(welfare_users, 100, 20) == Decimal("430")

    def test_example_at_cost(self, welfare_users):
        assert social_welfare(welfare_users, 20, 20) == Decimal("470")

    def test_empty(self):
        assert social_welfare(Population(), 10, 1) == 0

    @given(populations(), st.integers(0, 3000), st.integers(0, 6000))
    def test_maximized_at_cost(self, pop, c, p):
        if p <= c:
            return
        assert social_welfare(pop, Money(c), Money(c)) >= social_welfare(pop, Money(p), Money(c))

    @given(populations(), st.integers(0, 3000), st.integers(0, 6000))
    def test_profit_below_welfare(self, pop, c, p):
        assert profit(pop, Money(p), Money(c)) <= social_welfare(pop, Money(p), Money(c))

    @given(populations(), st.integers(0, 3000), st.integers(0, 6000), st.sampled_from(list(TieRule)))
    def test_matches_per_user_sum(self, pop, c, p, rule):
        total = Decimal(0)
        for u in pop:
            buys = user_best_response(u, Money(p), rule)
            total += user_net_benefit(u, buys, Money(p))
            if buys:
                total += Decimal(p - c) / 100
        assert social_welfare(pop, Money(p), Money(c), rule) == total


class TestDemandCurve:
    def test_example(self, three_users):
        curve = demand_curve(three_users, [5, 15, 25, 35], 0)
        assert curve.demands == [3, 2, 1, 0]
        assert curve.profits == [Decimal(15), Decimal(30), Decimal(25), Decimal(0)]

    def test_single_price(self, three_users):
        curve = demand_curve(three_users, [20], 0)
        assert len(curve) == 1
        assert curve.samples[0].demand == aggregate_demand(three_users, 20)
        assert curve.samples[0].profit == profit(three_users, 20, 0)

    def test_homogeneous_step(self):
        pop = Population.from_values([50] * 4)
        assert demand_curve(pop, [49, 50, 51], 0).demands == [4, 4, 0]

    def test_empty_grid(self, three_users):
        with pytest.raises(EmptyGridError):
            demand_curve(three_users, [], 0)

    def test_unsorted_grid(self, three_users):
        with pytest.raises(ValueError):
            demand_curve(three_users, [5, 5], 0)
