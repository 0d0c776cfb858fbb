import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moocpricing.errors import InvalidSpecError
from moocpricing.population import (
    AuditFraction,
    Empirical,
    MultiPopulationSpec,
    PointMass,
    PopulationSpec,
    TruncatedLognormal,
    Uniform,
    generate_multi_population,
    generate_population,
    multi_population_spec_from_dict,
    population_from_csv,
    population_spec_from_dict,
    population_to_csv,
)
from moocpricing.money import Money


def test_point_mass():
    pop = generate_population(PopulationSpec(5, PointMass(300), PointMass(0), seed=1))
    assert len(pop) == 5
    assert all(u.wtp_verified == Money.of(300) and u.utility_audit == Money(0) for u in pop)


def test_seed_determinism():
    spec = PopulationSpec(200, seed=42)
    assert generate_population(spec).users == generate_population(spec).users
    assert generate_population(spec).users != generate_population(PopulationSpec(200, seed=43)).users


def test_uniform_mean():
    pop = generate_population(PopulationSpec(10_000, Uniform(0, 100), AuditFraction(0), seed=9))
    # sd of the mean is 100/sqrt(12)/100 ~= 0.29, so +-2 is about 7 sd
    assert abs(pop.wtp_cents.mean() / 100 - 50) <= 2


def test_pinned_draws():
    # frozen from PCG64(2024).random(3) scaled to [0, 100)
    pop = generate_population(PopulationSpec(3, Uniform(0, 100), AuditFraction(0.5), seed=2024))
    u = np.random.Generator(np.random.PCG64(2024)).random(3)
    expected = np.rint(u * 100 * 100).astype(int)
    assert list(pop.wtp_cents) == list(expected)
    assert list(pop.audit_cents) == list(np.rint(expected / 2).astype(int))


def test_lognormal_respects_cap():
    spec = PopulationSpec(5000, TruncatedLognormal(5, 2, 800), AuditFraction(0.1), seed=3)
    pop = generate_population(spec)
    assert pop.wtp_cents.max() <= 80_000
    assert pop.wtp_cents.min() >= 0


def test_empirical_resampling():
    pop = generate_population(PopulationSpec(500, Empirical((10, 20, 30)), PointMass(0), seed=4))
    assert set(pop.wtp_cents.tolist()) <= {1000, 2000, 3000}


def test_independent_audit():
    pop = generate_population(PopulationSpec(100, Uniform(0, 10), Uniform(0, 10), seed=5))
    assert (pop.audit_cents > pop.wtp_cents).any()


@pytest.mark.parametrize("spec", [
    PopulationSpec(-1),
    PopulationSpec(3, Uniform(5, 1)),
    PopulationSpec(3, TruncatedLognormal(0, -1, 10)),
    PopulationSpec(3, audit=AuditFraction(1.5)),
    PopulationSpec(3, Empirical(())),
    PopulationSpec(3, seed=-1),
])
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpecError):
        generate_population(spec)


@settings(max_examples=30)
@given(st.integers(0, 300), st.integers(0, 2**64 - 1), st.floats(0, 1))
def test_ranges_and_quantization(size, seed, factor):
    pop = generate_population(PopulationSpec(size, TruncatedLognormal(4, 1.5, 5000),
                                             AuditFraction(factor), seed=seed))
    assert len(pop) == size
    assert (pop.wtp_cents >= 0).all() and (pop.wtp_cents <= 500_000).all()
    assert (pop.audit_cents <= pop.wtp_cents).all()
    for u in pop:
        assert u.wtp_verified.amount.as_tuple().exponent == -2


class TestMulti:
    def test_single_course_matches_single_population(self):
        single = generate_population(PopulationSpec(50, Uniform(0, 400), AuditFraction(0.3), seed=11))
        multi = generate_multi_population(
            MultiPopulationSpec(50, 1, Uniform(0, 400), AuditFraction(0.3), seed=11))
        assert [u.wtp[0] for u in multi] == [u.wtp_verified for u in single]
        assert [u.audit[0] for u in multi] == [u.utility_audit for u in single]

    def test_zero_cap_buys_nothing(self):
        from moocpricing.budget_choice import PriceSchedule, solve_user_purchase
        users = generate_multi_population(
            MultiPopulationSpec(20, 4, max_courses=PointMass(0), seed=2))
        sched = PriceSchedule.uniform_of(1, 4)
        assert all(solve_user_purchase(u, sched).count == 0 for u in users)

    def test_determinism_and_caps(self):
        spec = MultiPopulationSpec(30, 5, max_courses=Uniform(0, 9), correlation=0.6, seed=8)
        a, b = generate_multi_population(spec), generate_multi_population(spec)
        assert a == b
        assert all(0 <= u.max_courses <= 5 for u in a)

    def test_correlation_induces_dependence(self):
        spec = MultiPopulationSpec(4000, 2, Uniform(0, 100), AuditFraction(0), correlation=0.8, seed=1)
        users = generate_multi_population(spec)
        x = np.array([[u.wtp[0].cents, u.wtp[1].cents] for u in users], dtype=float)
        assert np.corrcoef(x.T)[0, 1] > 0.6
        indep = generate_multi_population(
            MultiPopulationSpec(4000, 2, Uniform(0, 100), AuditFraction(0), seed=1))
        y = np.array([[u.wtp[0].cents, u.wtp[1].cents] for u in indep], dtype=float)
        assert abs(np.corrcoef(y.T)[0, 1]) < 0.05


def test_spec_from_dict():
    spec = population_spec_from_dict(
        {"size": 4, "wtp": {"kind": "uniform", "lo": 1, "hi": 2}, "audit": {"kind": "fraction", "factor": 0.5}},
        seed=3)
    assert spec == PopulationSpec(4, Uniform(1, 2), AuditFraction(0.5), 3)
    with pytest.raises(InvalidSpecError):
        population_spec_from_dict({"size": 4, "wtp": {"kind": "pareto"}})
    multi = multi_population_spec_from_dict({"size": 2, "n_courses": 3, "budget": 100})
    assert multi.budget == PointMass(100.0)


def test_csv_roundtrip():
    pop = generate_population(PopulationSpec(25, seed=6))
    assert population_from_csv(population_to_csv(pop)).users == pop.users
    users = generate_multi_population(MultiPopulationSpec(2, 2, seed=6))
    text = population_to_csv(users)
    assert text.splitlines()[0] == "id,course,wtp,audit,budget,max_courses"
    assert len(text.splitlines()) == 5


def test_simulate_sales_is_deterministic_and_consistent():
    from moocpricing.population import simulate_sales

    a, b = simulate_sales(50, seed=3), simulate_sales(50, seed=3)
    assert a == b
    assert a != simulate_sales(50, seed=4)
    assert [r.course_id for r in a][:2] == ["sim01", "sim02"]
    for r in a:
        assert 0 <= r.paper_certs + r.verified_certs <= r.completers <= r.active_users


def test_simulate_sales_price_thresholds():
    from moocpricing.population import simulate_sales

    recs = simulate_sales(5, course_size=PointMass(1000), wtp=PointMass(300),
                          completion_rate=1.0, seed=0)
    assert all((r.completers, r.paper_certs, r.verified_certs) == (1000, 0, 1000) for r in recs)
    recs = simulate_sales(5, course_size=PointMass(1000), wtp=PointMass(299.99),
                          completion_rate=1.0, seed=0)
    assert all((r.paper_certs, r.verified_certs) == (1000, 0) for r in recs)


def test_simulate_sales_rejects_bad_arguments():
    from moocpricing.population import simulate_sales

    with pytest.raises(InvalidSpecError):
        simulate_sales(-1)
    with pytest.raises(InvalidSpecError):
        simulate_sales(3, completion_rate=1.5)
    with pytest.raises(InvalidSpecError):
        simulate_sales(3, paper_price=300, verified_price=100)
