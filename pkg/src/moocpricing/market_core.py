"""Single-course certificate market.

Each user either audits the course for free (utility ``audit``) or buys the
verified certificate at price ``p`` (utility ``wtp - p``). The platform sets
one price; demand, profit and social welfare follow from the users' best
responses.

All money is handled in integer cents internally; see :mod:`moocpricing.money`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .errors import AllBelowCostError, EmptyGridError
from .money import Money, MoneyLike, as_money, cents_to_decimal


class TieRule(enum.Enum):
    """How a user who is exactly indifferent between buying and auditing acts."""

    WEAK = "weak"  # indifferent users buy
    STRICT = "strict"  # indifferent users keep auditing

    INDIFFERENT_BUYS = "weak"
    INDIFFERENT_DECLINES = "strict"

    @classmethod
    def parse(cls, value) -> "TieRule":
        if isinstance(value, TieRule):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown tie rule {value!r}; expected 'weak' or 'strict'") from None


@dataclass(frozen=True)
class UserProfile:
    id: str
    wtp_verified: Money
    utility_audit: Money

    def __post_init__(self):
        object.__setattr__(self, "wtp_verified", as_money(self.wtp_verified))
        object.__setattr__(self, "utility_audit", as_money(self.utility_audit))

    @property
    def net_wtp_cents(self) -> int:
        return self.wtp_verified.cents - self.utility_audit.cents


class Population:
    """Immutable, ordered collection of users with unique ids."""

    def __init__(self, users: Iterable[UserProfile] = ()):
        self._users = tuple(users)
        ids = [u.id for u in self._users]
        if len(set(ids)) != len(ids):
            raise ValueError("user ids must be unique")
        self._wtp = np.array([u.wtp_verified.cents for u in self._users], dtype=np.int64)
        self._audit = np.array([u.utility_audit.cents for u in self._users], dtype=np.int64)
        for arr in (self._wtp, self._audit):
            arr.setflags(write=False)
        net = self._wtp - self._audit
        net.setflags(write=False)
        self._net = net
        self._net_sorted = np.sort(net)

    @classmethod
    def from_values(cls, wtp: Sequence[MoneyLike], audit: Sequence[MoneyLike] | None = None,
                    prefix: str = "u") -> "Population":
        if audit is None:
            audit = [0] * len(wtp)
        if len(audit) != len(wtp):
            raise ValueError("wtp and audit must have the same length")
        return cls(UserProfile(f"{prefix}{i + 1}", v, a) for i, (v, a) in enumerate(zip(wtp, audit)))

    @property
    def users(self) -> tuple[UserProfile, ...]:
        return self._users

    @property
    def wtp_cents(self) -> np.ndarray:
        return self._wtp

    @property
    def audit_cents(self) -> np.ndarray:
        return self._audit

    @property
    def net_wtp_cents(self) -> np.ndarray:
        """``wtp - audit`` per user, in input order."""
        return self._net

    def __len__(self) -> int:
        return len(self._users)

    def __iter__(self):
        return iter(self._users)

    def __getitem__(self, idx):
        return self._users[idx]

    def __repr__(self) -> str:
        return f"Population(n={len(self)})"


@dataclass(frozen=True)
class DemandSample:
    price: Money
    demand: int
    profit: Decimal


@dataclass(frozen=True)
class DemandCurve:
    samples: tuple[DemandSample, ...] = field(default_factory=tuple)

    @property
    def prices(self) -> list[Money]:
        return [s.price for s in self.samples]

    @property
    def demands(self) -> list[int]:
        return [s.demand for s in self.samples]

    @property
    def profits(self) -> list[Decimal]:
        return [s.profit for s in self.samples]

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class PriceOptimum:
    price: Money
    profit: Decimal
    demand: int
    all_below_cost: bool = False


def user_net_benefit(user: UserProfile, buys: bool, price: MoneyLike) -> Decimal:
    """Utility of a user's choice at ``price``; may be negative when buying."""
    price = as_money(price)
    if buys:
        return cents_to_decimal(user.wtp_verified.cents - price.cents)
    return user.utility_audit.amount


def user_best_response(user: UserProfile, price: MoneyLike, rule: TieRule = TieRule.WEAK) -> bool:
    """Whether the user buys the certificate at ``price``."""
    p = as_money(price).cents
    rule = TieRule.parse(rule)
    if rule is TieRule.WEAK:
        return user.net_wtp_cents >= p
    return user.net_wtp_cents > p


def _demand_at(net_sorted: np.ndarray, price_cents, rule: TieRule):
    side = "left" if rule is TieRule.WEAK else "right"
    return len(net_sorted) - np.searchsorted(net_sorted, price_cents, side=side)


def buyer_mask(pop: Population, price: MoneyLike, rule: TieRule = TieRule.WEAK) -> np.ndarray:
    p = as_money(price).cents
    if TieRule.parse(rule) is TieRule.WEAK:
        return pop.net_wtp_cents >= p
    return pop.net_wtp_cents > p


def aggregate_demand(pop: Population, price: MoneyLike, rule: TieRule = TieRule.WEAK) -> int:
    """Number of users who buy at ``price``."""
    return int(_demand_at(pop._net_sorted, as_money(price).cents, TieRule.parse(rule)))


def profit(pop: Population, price: MoneyLike, marginal_cost: MoneyLike,
           rule: TieRule = TieRule.WEAK) -> Decimal:
    """Platform profit ``D(p) * (p - c)``."""
    p = as_money(price).cents
    c = as_money(marginal_cost).cents
    return cents_to_decimal(aggregate_demand(pop, Money(p), rule) * (p - c))


def candidate_prices(pop: Population, marginal_cost: MoneyLike) -> list[Money]:
    """Distinct net WTPs above marginal cost, plus the marginal cost itself, ascending.

    Profit is piecewise linear in price with breakpoints only at net-WTP
    values, so the profit-maximizing price is always one of these.
    """
    c = as_money(marginal_cost).cents
    net = np.unique(pop.net_wtp_cents)
    return [Money(c)] + [Money(int(v)) for v in net[net > c]]


def optimal_price(pop: Population, marginal_cost: MoneyLike,
                  rule: TieRule = TieRule.WEAK) -> PriceOptimum:
    """Profit-maximizing certificate price.

    Searches the finite candidate set from :func:`candidate_prices`. Ties go to
    the lowest price, which sells the most certificates at equal profit.

    Under ``TieRule.STRICT`` users sitting exactly at a candidate price do not
    buy, so the result is the best candidate rather than the (unattained)
    supremum just below it.

    Raises:
        ValueError: if the population is empty.
        AllBelowCostError: if nobody's net WTP exceeds marginal cost. The
            exception's ``result`` holds the flagged fallback
            ``PriceOptimum(c, 0, 0, all_below_cost=True)``.
    """
    if len(pop) == 0:
        raise ValueError("optimal_price needs at least one user")
    rule = TieRule.parse(rule)
    c = as_money(marginal_cost).cents
    net = np.unique(pop.net_wtp_cents)
    cands = net[net > c]
    if cands.size == 0:
        fallback = PriceOptimum(Money(c), Decimal("0.00"), 0, all_below_cost=True)
        raise AllBelowCostError(
            f"no user has net WTP above marginal cost {cents_to_decimal(c)}", fallback)
    demand = _demand_at(pop._net_sorted, cands, rule)
    profits = demand * (cands - c)
    # np.argmax returns the first maximum, i.e. the lowest price
    best = int(np.argmax(profits))
    if profits[best] <= 0:
        # only reachable under STRICT with every candidate priced out
        return PriceOptimum(Money(c), Decimal("0.00"), aggregate_demand(pop, Money(c), rule))
    return PriceOptimum(Money(int(cands[best])), cents_to_decimal(int(profits[best])), int(demand[best]))


def social_welfare(pop: Population, price: MoneyLike, marginal_cost: MoneyLike,
                   rule: TieRule = TieRule.WEAK) -> Decimal:
    """Consumer plus producer surplus at ``price``.

    Each user contributes the utility of their realized choice: ``wtp - p``
    if they buy, ``audit`` otherwise. The producer earns ``p - c`` per sale.
    """
    p = as_money(price).cents
    c = as_money(marginal_cost).cents
    buys = buyer_mask(pop, Money(p), rule)
    consumer = int(np.where(buys, pop.wtp_cents - p, pop.audit_cents).sum())
    producer = int(buys.sum()) * (p - c)
    return cents_to_decimal(consumer + producer)


def demand_curve(pop: Population, price_grid: Sequence[MoneyLike], marginal_cost: MoneyLike,
                 rule: TieRule = TieRule.WEAK) -> DemandCurve:
    """Tabulate demand and profit over a strictly increasing price grid."""
    grid = [as_money(p) for p in price_grid]
    if not grid:
        raise EmptyGridError("price grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("price grid must be strictly increasing")
    rule = TieRule.parse(rule)
    c = as_money(marginal_cost).cents
    cents = np.array([g.cents for g in grid], dtype=np.int64)
    demand = _demand_at(pop._net_sorted, cents, rule)
    return DemandCurve(tuple(
        DemandSample(g, int(d), cents_to_decimal(int(d) * (g.cents - c)))
        for g, d in zip(grid, demand)
    ))
