"""Platform-as-leader pricing and price-experiment based WTP estimation.

The platform (leader) commits to a certificate price; each user (follower)
best-responds by buying or auditing. Solving the followers first and then the
leader gives the same price as direct profit maximization.

The platform can also probe prices and record how many users buy. Pooling
those experiments gives an empirical survival curve ``P(net WTP >= p)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import AllBelowCostError, EmptyExperimentsError
from .market_core import (
    Population,
    PriceOptimum,
    TieRule,
    aggregate_demand,
    buyer_mask,
    candidate_prices,
    user_best_response,
)
from .money import Money, MoneyLike, as_money, cents_to_decimal

NOISE_MODELS = ("tremble", "flip")


@dataclass(frozen=True)
class StackelbergOutcome:
    leader_price: Money
    follower_decisions: tuple[bool, ...]
    profit: Decimal

    @property
    def demand(self) -> int:
        return sum(self.follower_decisions)


@dataclass(frozen=True)
class PriceExperiment:
    price: Money
    population_size: int
    observed_demand: int

    def __post_init__(self):
        object.__setattr__(self, "price", as_money(self.price))
        if self.population_size < 1:
            raise ValueError("population_size must be at least 1")
        if not 0 <= self.observed_demand <= self.population_size:
            raise ValueError(
                f"observed_demand {self.observed_demand} outside [0, {self.population_size}]")


@dataclass(frozen=True)
class EmpiricalSurvival:
    """Estimated ``P(net WTP >= price)`` at each probed price."""

    prices: tuple[Money, ...]
    survival: tuple[float, ...]

    def __iter__(self):
        return iter(zip(self.prices, self.survival))

    def __len__(self) -> int:
        return len(self.prices)

    def at(self, price: MoneyLike) -> float:
        price = as_money(price)
        return self.survival[self.prices.index(price)]

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["price", "survival"])
        for p, s in self:
            writer.writerow([str(p), repr(float(s))])
        return buf.getvalue()


def follower_responses(pop: Population, price: MoneyLike,
                       rule: TieRule = TieRule.WEAK) -> tuple[bool, ...]:
    """Each follower's best response to a posted price."""
    return tuple(user_best_response(u, price, rule) for u in pop)


def backward_induction(pop: Population, marginal_cost: MoneyLike,
                       rule: TieRule = TieRule.WEAK) -> StackelbergOutcome:
    """Solve the pricing game by backward induction.

    Stage two: for every candidate leader price, compute each follower's best
    response. Stage one: the leader picks the price whose induced responses
    give the highest profit, lowest price on ties.
    """
    if len(pop) == 0:
        raise ValueError("backward_induction needs at least one follower")
    rule = TieRule.parse(rule)
    c = as_money(marginal_cost)
    prices = [p for p in candidate_prices(pop, c) if p > c]
    if not prices:
        fallback = PriceOptimum(c, Decimal("0.00"), 0, all_below_cost=True)
        raise AllBelowCostError(f"no follower values the certificate above cost {c}", fallback)

    c_cents = c.cents
    price_cents = np.array([p.cents for p in prices], dtype=np.int64)
    net = pop.net_wtp_cents
    # stage two: response table, one row per leader price, one column per follower
    if rule is TieRule.WEAK:
        table = net[None, :] >= price_cents[:, None]
    else:
        table = net[None, :] > price_cents[:, None]
    # stage one: leader payoff against those responses
    payoff = table.sum(axis=1) * (price_cents - c_cents)
    k = int(np.argmax(payoff))
    if payoff[k] <= 0:
        # STRICT rule with every candidate priced out: sell at cost
        return StackelbergOutcome(c, follower_responses(pop, c, rule), Decimal("0.00"))
    decisions = tuple(bool(x) for x in table[k])
    return StackelbergOutcome(prices[k], decisions, cents_to_decimal(int(payoff[k])))


def run_price_experiments(pop: Population, prices: Sequence[MoneyLike],
                          rule: TieRule = TieRule.WEAK, *, noise: float = 0.0,
                          noise_model: str = "tremble", sample_size: int | None = None,
                          seed: int | None = None) -> list[PriceExperiment]:
    """Post each price to the population and count purchases.

    With the defaults every probe is an exact, noiseless count. Optional
    perturbations, all driven by one PCG64 stream seeded with ``seed``:

    - ``sample_size``: each probe sees a fresh cohort of this many users drawn
      without replacement from the population.
    - ``noise`` with ``noise_model="tremble"``: each decision is replaced by
      a fair coin toss with probability ``noise``.
    - ``noise`` with ``noise_model="flip"``: each decision is inverted with
      probability ``noise``.
    """
    prices = [as_money(p) for p in prices]
    if not prices:
        raise ValueError("need at least one price")
    if len(pop) == 0:
        raise ValueError("cannot run experiments on an empty population")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    if noise_model not in NOISE_MODELS:
        raise ValueError(f"noise_model must be one of {NOISE_MODELS}")
    if sample_size is not None and not 1 <= sample_size <= len(pop):
        raise ValueError("sample_size must be between 1 and the population size")
    rule = TieRule.parse(rule)

    if noise == 0.0 and sample_size is None:
        return [PriceExperiment(p, len(pop), aggregate_demand(pop, p, rule)) for p in prices]

    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    for p in prices:
        buys = buyer_mask(pop, p, rule)
        if sample_size is not None:
            buys = buys[rng.choice(len(pop), size=sample_size, replace=False)]
        if noise > 0.0:
            hit = rng.random(buys.size) < noise
            if noise_model == "tremble":
                coin = rng.random(buys.size) < 0.5
                buys = np.where(hit, coin, buys)
            else:
                buys = buys ^ hit
        out.append(PriceExperiment(p, int(buys.size), int(buys.sum())))
    return out


def pool_adjacent_violators(values: Sequence, weights: Sequence) -> list:
    """Weighted least-squares non-increasing fit.

    Works on any numeric type closed under ``+``, ``*`` and ``/`` (floats,
    ``Fraction``). Returns one fitted value per input.
    """
    if len(values) != len(weights):
        raise ValueError("values and weights must have the same length")
    # each block: [weighted sum, total weight, length]
    blocks: list[list] = []
    for v, w in zip(values, weights):
        if w <= 0:
            raise ValueError("weights must be positive")
        blocks.append([v * w, w, 1])
        while len(blocks) > 1 and blocks[-2][0] / blocks[-2][1] < blocks[-1][0] / blocks[-1][1]:
            s, w2, n = blocks.pop()
            blocks[-1][0] += s
            blocks[-1][1] += w2
            blocks[-1][2] += n
    fitted = []
    for s, w, n in blocks:
        fitted.extend([s / w] * n)
    return fitted


def estimate_wtp_survival(experiments: Iterable[PriceExperiment]) -> EmpiricalSurvival:
    """Empirical survival curve from price experiments.

    Experiments at the same price are pooled (demands and population sizes
    summed). The raw buy fractions are then made non-increasing in price with
    pool-adjacent-violators, weighted by pooled population size.
    """
    pooled: dict[Money, list[int]] = {}
    for e in experiments:
        acc = pooled.setdefault(e.price, [0, 0])
        acc[0] += e.observed_demand
        acc[1] += e.population_size
    if not pooled:
        raise EmptyExperimentsError("no experiments to estimate from")
    prices = sorted(pooled)
    raw = [Fraction(pooled[p][0], pooled[p][1]) for p in prices]
    weights = [pooled[p][1] for p in prices]
    fitted = pool_adjacent_violators(raw, weights)
    return EmpiricalSurvival(tuple(prices), tuple(float(f) for f in fitted))


def true_survival(pop: Population, prices: Sequence[MoneyLike],
                  rule: TieRule = TieRule.WEAK) -> list[float]:
    """Exact fraction of the population buying at each price."""
    n = len(pop)
    return [float(Fraction(aggregate_demand(pop, p, rule), n)) for p in prices]


def experiments_to_csv(experiments: Sequence[PriceExperiment]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["price", "population_size", "observed_demand"])
    for e in experiments:
        writer.writerow([str(e.price), e.population_size, e.observed_demand])
    return buf.getvalue()


def experiments_from_csv(text: str) -> list[PriceExperiment]:
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    reader = csv.DictReader(rows)
    expected = ["price", "population_size", "observed_demand"]
    if reader.fieldnames != expected:
        raise ValueError(f"experiments CSV header must be {','.join(expected)}")
    return [PriceExperiment(Money.of(r["price"]), int(r["population_size"]), int(r["observed_demand"]))
            for r in reader]
