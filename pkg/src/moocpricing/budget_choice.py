"""Multi-course certificate purchases under a budget and a course cap.

A user facing prices ``p_m`` over ``M`` courses picks the subset that
maximizes ``sum(wtp_m - p_m)`` subject to

- eligibility: a course may be bought only if ``wtp_m - audit_m >= p_m``;
- budget: total spend at most ``budget``;
- cardinality: at most ``max_courses`` certificates;
- each course bought at most once.

Among surplus-optimal subsets the one with more courses wins, then the
lexicographically smallest index set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from .errors import (
    AllBelowCostError,
    DimensionMismatchError,
    NonPositivePriceError,
    NonUniformScheduleError,
    TooManyCoursesError,
)
from .money import Money, MoneyLike, as_money, cents_to_decimal

BRUTE_FORCE_MAX_COURSES = 20


@dataclass(frozen=True)
class MultiCourseUser:
    id: str
    wtp: tuple[Money, ...]
    audit: tuple[Money, ...]
    budget: Money
    max_courses: int

    def __post_init__(self):
        wtp = tuple(as_money(v) for v in self.wtp)
        audit = tuple(as_money(v) for v in self.audit)
        if len(wtp) != len(audit):
            raise DimensionMismatchError("wtp and audit vectors differ in length")
        if not 0 <= self.max_courses <= len(wtp):
            raise ValueError(f"max_courses must be in [0, {len(wtp)}], got {self.max_courses}")
        object.__setattr__(self, "wtp", wtp)
        object.__setattr__(self, "audit", audit)
        object.__setattr__(self, "budget", as_money(self.budget))
        object.__setattr__(self, "max_courses", int(self.max_courses))

    @property
    def n_courses(self) -> int:
        return len(self.wtp)

    def net_wtp_cents(self) -> list[int]:
        return [v.cents - a.cents for v, a in zip(self.wtp, self.audit)]


@dataclass(frozen=True)
class PriceSchedule:
    prices: tuple[Money, ...]

    def __post_init__(self):
        prices = tuple(as_money(p) for p in self.prices)
        if any(p.cents <= 0 for p in prices):
            raise NonPositivePriceError("all course prices must be positive")
        object.__setattr__(self, "prices", prices)

    @classmethod
    def uniform_of(cls, price: MoneyLike, n_courses: int) -> "PriceSchedule":
        return cls((as_money(price),) * n_courses)

    @property
    def uniform(self) -> Money | None:
        """The common price when every course costs the same, else ``None``."""
        if self.prices and all(p == self.prices[0] for p in self.prices):
            return self.prices[0]
        return None

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class PurchaseSelection:
    chosen: tuple[bool, ...]
    total_spend: Money
    surplus: Decimal
    count: int

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.chosen) if x)


def _check_dims(user: MultiCourseUser, schedule: PriceSchedule):
    if len(schedule) != user.n_courses:
        raise DimensionMismatchError(
            f"schedule has {len(schedule)} prices but user {user.id!r} has {user.n_courses} courses")


def _selection(user: MultiCourseUser, schedule: PriceSchedule, indices: Sequence[int]) -> PurchaseSelection:
    chosen = [False] * user.n_courses
    spend = 0
    surplus = 0
    for i in indices:
        chosen[i] = True
        spend += schedule.prices[i].cents
        surplus += user.wtp[i].cents - schedule.prices[i].cents
    return PurchaseSelection(tuple(chosen), Money(spend), cents_to_decimal(surplus), len(indices))


def _better(surplus, count, idx, best):
    """Selection order: higher surplus, then more courses, then smaller index tuple."""
    if best is None:
        return True
    b_surplus, b_count, b_idx = best
    if surplus != b_surplus:
        return surplus > b_surplus
    if count != b_count:
        return count > b_count
    return idx < b_idx


def solve_user_purchase(user: MultiCourseUser, schedule: PriceSchedule) -> PurchaseSelection:
    """Exact optimum of the user's purchase problem by depth-first branch and bound.

    Ineligible courses are dropped up front. The bound at each node adds the
    largest remaining per-course surpluses that individually fit the remaining
    budget, up to the remaining course allowance. A branch is pruned only when
    its bound is strictly below the incumbent, so tied optima are all visited
    and the tie-breaking order is applied exactly.
    """
    _check_dims(user, schedule)
    budget = user.budget.cents
    items = []
    for m in range(user.n_courses):
        p = schedule.prices[m].cents
        if user.wtp[m].cents - user.audit[m].cents >= p and p <= budget:
            items.append((m, p, user.wtp[m].cents - p))
    n = len(items)
    best = None

    def bound(k, remaining_budget, remaining_slots):
        if remaining_slots <= 0:
            return 0
        gains = sorted((v for _, p, v in items[k:] if p <= remaining_budget), reverse=True)
        return sum(g for g in gains[:remaining_slots] if g > 0)

    def dfs(k, spend, count, surplus, picked):
        nonlocal best
        if k == n or count == user.max_courses:
            idx = tuple(picked)
            if _better(surplus, count, idx, best):
                best = (surplus, count, idx)
            return
        if best is not None and surplus + bound(k, budget - spend, user.max_courses - count) < best[0]:
            return
        m, p, v = items[k]
        if spend + p <= budget:
            picked.append(m)
            dfs(k + 1, spend + p, count + 1, surplus + v, picked)
            picked.pop()
        dfs(k + 1, spend, count, surplus, picked)

    dfs(0, 0, 0, 0, [])
    return _selection(user, schedule, best[2])


def brute_force_purchase(user: MultiCourseUser, schedule: PriceSchedule) -> PurchaseSelection:
    """Reference solver: enumerate every subset of courses.

    All ``2**M`` subsets are scored at once as rows of a 0/1 matrix; the
    winner is then re-checked with :func:`validate_selection`.
    """
    _check_dims(user, schedule)
    m = user.n_courses
    if m > BRUTE_FORCE_MAX_COURSES:
        raise TooManyCoursesError(f"brute force limited to {BRUTE_FORCE_MAX_COURSES} courses, got {m}")
    wtp = np.array([v.cents for v in user.wtp], dtype=np.int64)
    audit = np.array([v.cents for v in user.audit], dtype=np.int64)
    price = np.array([v.cents for v in schedule.prices], dtype=np.int64)
    bits = (np.arange(1 << m, dtype=np.int64)[:, None] >> np.arange(m)) & 1
    spend = bits @ price
    surplus = bits @ (wtp - price)
    count = bits.sum(axis=1)
    ineligible = bits @ (wtp - audit < price).astype(np.int64)
    feasible = (spend <= user.budget.cents) & (count <= user.max_courses) & (ineligible == 0)
    rows = np.flatnonzero(feasible)  # never empty: the empty set is feasible
    rows = rows[surplus[rows] == surplus[rows].max()]
    rows = rows[count[rows] == count[rows].max()]
    idx = min(tuple(np.flatnonzero(bits[r]).tolist()) for r in rows)
    sel = _selection(user, schedule, idx)
    problems = validate_selection(user, schedule, sel)
    if problems:
        raise AssertionError(f"enumeration produced an infeasible selection: {problems}")
    return sel


def validate_selection(user: MultiCourseUser, schedule: PriceSchedule,
                       selection: PurchaseSelection) -> list[str]:
    """List every constraint the selection violates; empty means feasible."""
    _check_dims(user, schedule)
    problems = []
    if len(selection.chosen) != user.n_courses:
        return [f"selection has {len(selection.chosen)} entries for {user.n_courses} courses"]
    if any(x not in (True, False) for x in selection.chosen):
        problems.append("decisions must be binary")
    idx = [i for i, x in enumerate(selection.chosen) if x]
    for i in idx:
        if user.wtp[i].cents - user.audit[i].cents < schedule.prices[i].cents:
            problems.append(f"course {i} is not worth buying over auditing")
    spend = sum(schedule.prices[i].cents for i in idx)
    if spend > user.budget.cents:
        problems.append(f"spend {cents_to_decimal(spend)} exceeds budget {user.budget}")
    if len(idx) > user.max_courses:
        problems.append(f"{len(idx)} courses exceed the cap of {user.max_courses}")
    if selection.total_spend.cents != spend:
        problems.append("reported spend does not match the chosen courses")
    if selection.count != len(idx):
        problems.append("reported count does not match the chosen courses")
    surplus = cents_to_decimal(sum(user.wtp[i].cents - schedule.prices[i].cents for i in idx))
    if selection.surplus != surplus:
        problems.append("reported surplus does not match the chosen courses")
    return problems


def uniform_price_demand(user: MultiCourseUser, price) -> int:
    """Certificates a user buys when every course has the same price.

    Closed form ``min(max_courses, floor(budget / p), #eligible courses)``.
    Valid whenever audit utilities are non-negative: each eligible course then
    adds non-negative surplus, so buying as many as the constraints allow is
    optimal.

    ``price`` may be a single amount or a uniform :class:`PriceSchedule`.
    """
    if isinstance(price, PriceSchedule):
        _check_dims(user, price)
        if price.uniform is None:
            raise NonUniformScheduleError("schedule prices differ across courses")
        price = price.uniform
    p = as_money(price).cents
    if p <= 0:
        raise NonPositivePriceError("uniform price must be positive")
    eligible = sum(1 for net in user.net_wtp_cents() if net >= p)
    return min(user.max_courses, user.budget.cents // p, eligible)


def aggregate_uniform_demand(users: Sequence[MultiCourseUser], price) -> int:
    return sum(uniform_price_demand(u, price) for u in users)


@dataclass(frozen=True)
class UniformPriceOptimum:
    price: Money
    profit: Decimal
    certificates_sold: int
    all_below_cost: bool = False


def uniform_price_candidates(users: Sequence[MultiCourseUser]) -> list[Money]:
    """Prices where aggregate uniform-price demand can step down.

    Demand is constant between consecutive breakpoints and profit rises with
    price there, so the optimum sits on a breakpoint: a positive per-course net
    WTP, or the largest cent amount ``<= budget / k`` for some ``k`` up to the
    user's course cap.
    """
    cands = set()
    for u in users:
        cands.update(net for net in u.net_wtp_cents() if net > 0)
        if u.budget.cents > 0:
            cands.update(u.budget.cents // k for k in range(1, u.max_courses + 1))
    cands.discard(0)
    return [Money(c) for c in sorted(cands)]


def optimal_uniform_price(users: Sequence[MultiCourseUser], marginal_cost: MoneyLike) -> UniformPriceOptimum:
    """Profit-maximizing single price for all courses; lowest price wins ties.

    Raises:
        ValueError: with no users.
        AllBelowCostError: when no candidate above marginal cost sells anything.
    """
    if not users:
        raise ValueError("optimal_uniform_price needs at least one user")
    c = as_money(marginal_cost)
    best = None
    for p in uniform_price_candidates(users):
        if p <= c:
            continue
        sold = aggregate_uniform_demand(users, p)
        margin = sold * (p.cents - c.cents)
        if sold > 0 and (best is None or margin > best[0]):
            best = (margin, p, sold)
    if best is None:
        fallback = UniformPriceOptimum(c, Decimal("0.00"), 0, all_below_cost=True)
        raise AllBelowCostError("no uniform price above marginal cost sells a certificate", fallback)
    margin, p, sold = best
    return UniformPriceOptimum(p, cents_to_decimal(margin), sold)


# -- JSON instances ---------------------------------------------------------

def instance_to_dict(users: Sequence[MultiCourseUser], schedule: PriceSchedule | None = None) -> dict:
    doc = {
        "users": [
            {
                "id": u.id,
                "wtp": [str(v) for v in u.wtp],
                "audit": [str(a) for a in u.audit],
                "budget": str(u.budget),
                "max_courses": u.max_courses,
            }
            for u in users
        ]
    }
    if schedule is not None:
        doc["prices"] = [str(p) for p in schedule.prices]
    return doc


def instance_from_dict(doc: dict) -> tuple[list[MultiCourseUser], PriceSchedule | None]:
    """Parse ``{"users": [...], "prices": [...]}``; ``prices`` is optional."""
    if "users" not in doc:
        raise ValueError("instance needs a 'users' array")
    users = []
    for i, u in enumerate(doc["users"]):
        try:
            wtp = u["wtp"]
            users.append(MultiCourseUser(
                id=str(u.get("id", f"u{i + 1}")),
                wtp=tuple(wtp),
                audit=tuple(u.get("audit", [0] * len(wtp))),
                budget=u["budget"],
                max_courses=int(u.get("max_courses", len(wtp))),
            ))
        except KeyError as exc:
            raise ValueError(f"user {i}: missing field {exc.args[0]!r}") from None
    schedule = PriceSchedule(tuple(doc["prices"])) if doc.get("prices") is not None else None
    if schedule is not None:
        for u in users:
            _check_dims(u, schedule)
    return users, schedule


def dump_instance(users, schedule=None) -> str:
    return json.dumps(instance_to_dict(users, schedule), indent=2, sort_keys=True) + "\n"


def load_instance(text: str):
    return instance_from_dict(json.loads(text))
