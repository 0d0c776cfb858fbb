from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.isotonic import IsotonicRegression

from moocpricing.errors import AllBelowCostError, EmptyExperimentsError
from moocpricing.market_core import Population, TieRule, optimal_price, user_best_response
from moocpricing.money import Money
from moocpricing.stackelberg import (
    EmpiricalSurvival,
    PriceExperiment,
    backward_induction,
    estimate_wtp_survival,
    experiments_from_csv,
    experiments_to_csv,
    pool_adjacent_violators,
    run_price_experiments,
    true_survival,
)

from conftest import populations


class TestBackwardInduction:
    def test_example(self, three_users):
        out = backward_induction(three_users, 0)
        assert out.leader_price == Money.of(20)
        assert out.follower_decisions == (False, True, True)
        assert out.profit == Decimal(40)

    def test_single_follower(self):
        out = backward_induction(Population.from_values([25]), 0)
        assert out.leader_price == Money.of(25)
        assert out.follower_decisions == (True,)

    def test_all_below_cost(self):
        with pytest.raises(AllBelowCostError):
            backward_induction(Population.from_values([5, 8]), 10)

    @given(populations(), st.integers(0, 3000), st.sampled_from(list(TieRule)))
    def test_equals_optimal_price(self, pop, c, rule):
        try:
            opt = optimal_price(pop, Money(c), rule)
        except AllBelowCostError:
            with pytest.raises(AllBelowCostError):
                backward_induction(pop, Money(c), rule)
            return
        out = backward_induction(pop, Money(c), rule)
        assert (out.leader_price, out.profit) == (opt.price, opt.profit)

    @given(populations(), st.integers(0, 3000))
    def test_decisions_are_best_responses(self, pop, c):
        try:
            out = backward_induction(pop, Money(c))
        except AllBelowCostError:
            return
        assert out.follower_decisions == tuple(user_best_response(u, out.leader_price) for u in pop)


class TestPriceExperiments:
    def test_example(self, three_users):
        exps = run_price_experiments(three_users, [15, 25])
        assert [(e.population_size, e.observed_demand) for e in exps] == [(3, 2), (3, 1)]

    def test_zero_price(self):
        pop = Population.from_values([10, 5, 7], [5, 10, 0])
        assert run_price_experiments(pop, [0])[0].observed_demand == 2

    def test_above_max(self, three_users):
        assert run_price_experiments(three_users, [31])[0].observed_demand == 0

    def test_empty_prices(self, three_users):
        with pytest.raises(ValueError):
            run_price_experiments(three_users, [])

    def test_noise_is_seeded(self):
        pop = Population.from_values(list(range(1, 501)))
        a = run_price_experiments(pop, [100, 200], noise=0.2, seed=7)
        b = run_price_experiments(pop, [100, 200], noise=0.2, seed=7)
        c = run_price_experiments(pop, [100, 200], noise=0.2, seed=8)
        assert a == b
        assert a != c

    def test_flip_noise_full_inversion(self, three_users):
        exps = run_price_experiments(three_users, [15], noise=1.0, noise_model="flip", seed=1)
        assert exps[0].observed_demand == 1

    def test_subsampled_cohort(self):
        pop = Population.from_values([50] * 40 + [5] * 60)
        exps = run_price_experiments(pop, [10] * 3, sample_size=20, seed=3)
        assert all(e.population_size == 20 for e in exps)
        assert all(0 <= e.observed_demand <= 20 for e in exps)

    def test_invalid_experiment(self):
        with pytest.raises(ValueError):
            PriceExperiment(10, 3, 4)

    def test_csv_roundtrip(self, three_users):
        exps = run_price_experiments(three_users, [15, 25])
        assert experiments_from_csv(experiments_to_csv(exps)) == exps


class TestEstimateSurvival:
    def test_monotone_example(self):
        est = estimate_wtp_survival([PriceExperiment(15, 3, 2), PriceExperiment(25, 3, 1)])
        assert est.survival == (2 / 3, 1 / 3)
        assert est.prices == (Money.of(15), Money.of(25))

    def test_single(self):
        assert estimate_wtp_survival([PriceExperiment(9, 4, 4)]).survival == (1.0,)

    def test_violating_pair_pooled(self):
        est = estimate_wtp_survival([PriceExperiment(10, 100, 50), PriceExperiment(20, 100, 60)])
        assert est.survival == pytest.approx((0.55, 0.55), abs=1e-15)

    def test_duplicates_pooled_and_unsorted_input(self):
        est = estimate_wtp_survival([
            PriceExperiment(20, 10, 2), PriceExperiment(10, 10, 9), PriceExperiment(10, 30, 21),
        ])
        assert est.prices == (Money.of(10), Money.of(20))
        assert est.survival == (0.75, 0.2)

    def test_empty(self):
        with pytest.raises(EmptyExperimentsError):
            estimate_wtp_survival([])

    def test_csv(self):
        est = EmpiricalSurvival((Money.of(1), Money.of(2)), (1.0, 0.5))
        assert est.to_csv() == "price,survival\n1.00,1.0\n2.00,0.5\n"

    @given(populations(max_size=50), st.lists(st.integers(0, 6000), min_size=1, max_size=15))
    def test_noiseless_is_exact(self, pop, prices):
        prices = [Money(p) for p in prices]
        est = estimate_wtp_survival(run_price_experiments(pop, prices))
        assert list(est.survival) == true_survival(pop, est.prices)

    @given(st.lists(st.tuples(st.integers(0, 100), st.integers(1, 50), st.floats(0, 1)),
                    min_size=1, max_size=20))
    def test_output_non_increasing(self, raw):
        exps = [PriceExperiment(p, n, int(f * n)) for p, n, f in raw]
        s = estimate_wtp_survival(exps).survival
        assert all(b <= a for a, b in zip(s, s[1:]))
        assert all(0 <= v <= 1 for v in s)


@given(st.lists(st.tuples(st.floats(0, 1), st.integers(1, 100)), min_size=1, max_size=30))
def test_pav_matches_sklearn(pairs):
    values = [v for v, _ in pairs]
    weights = [w for _, w in pairs]
    ours = pool_adjacent_violators([Fraction(v) for v in values], weights)
    ref = IsotonicRegression(increasing=False).fit_transform(
        np.arange(len(values)), values, sample_weight=weights)
    assert np.allclose([float(x) for x in ours], ref, atol=1e-9)
