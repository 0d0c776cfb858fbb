"""Fixed-point currency amounts.

Prices, costs and budgets are stored as integer cents so comparisons at
indifference boundaries and budget sums are exact. Signed quantities
(net benefits, profits, welfare) are reported as ``Decimal`` with two places.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from numbers import Integral
from typing import Union

CENT = Decimal("0.01")

MoneyLike = Union["Money", int, float, str, Decimal]


def to_decimal(value) -> Decimal:
    """Quantize ``value`` to two decimal places (banker's rounding)."""
    if isinstance(value, Money):
        return value.amount
    if isinstance(value, float):
        value = repr(value)
    try:
        return Decimal(value).quantize(CENT, rounding=ROUND_HALF_EVEN)
    except (InvalidOperation, TypeError) as exc:
        raise ValueError(f"not a currency amount: {value!r}") from exc


def cents_to_decimal(cents: int) -> Decimal:
    return (Decimal(int(cents)) * CENT).quantize(CENT)


@dataclass(frozen=True, order=True)
class Money:
    """A non-negative amount with two-decimal precision."""

    cents: int

    def __post_init__(self):
        if not isinstance(self.cents, Integral) or isinstance(self.cents, bool):
            raise TypeError(f"cents must be an integer, got {self.cents!r}")
        object.__setattr__(self, "cents", int(self.cents))
        if self.cents < 0:
            raise ValueError(f"money must be non-negative, got {self.cents} cents")

    @classmethod
    def of(cls, value: MoneyLike) -> "Money":
        """Build from currency units: ``Money.of("12.5")``, ``Money.of(300)``."""
        if isinstance(value, Money):
            return value
        return cls(int(to_decimal(value) / CENT))

    @classmethod
    def from_cents(cls, cents: int) -> "Money":
        return cls(int(cents))

    @property
    def amount(self) -> Decimal:
        return cents_to_decimal(self.cents)

    def __add__(self, other: "Money") -> "Money":
        if not isinstance(other, Money):
            return NotImplemented
        return Money(self.cents + other.cents)

    def __mul__(self, count: int) -> "Money":
        if not isinstance(count, Integral):
            return NotImplemented
        return Money(self.cents * int(count))

    __rmul__ = __mul__

    def __float__(self) -> float:
        return self.cents / 100

    def __str__(self) -> str:
        return str(self.amount)

    def __format__(self, spec: str) -> str:
        return format(str(self), spec)

    def __repr__(self) -> str:
        return f"Money('{self.amount}')"


def as_money(value: MoneyLike) -> Money:
    return Money.of(value)


ZERO = Money(0)
