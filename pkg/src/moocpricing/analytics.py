"""Sales-data analytics for certificate tiers.

Input is one row per course offering with counts of active users, completers
and buyers of the two paid certificate tiers. A completer is taken to value
the certificate above zero, a paper-certificate buyer to have WTP in
``[paper_price, verified_price)``, and a verified buyer WTP of at least
``verified_price``.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvariantViolationError,
    MissingFileError,
    MixedCourseIdsError,
    NoCompletersError,
    SchemaMismatchError,
    TooFewOfferingsError,
    ZeroMeanError,
    ZeroTotalRevenueError,
)
from .money import Money, as_money

SALES_COLUMNS = ("course_id", "semester", "subject", "active_users", "completers",
                 "paper_certs", "verified_certs")
COUNT_COLUMNS = SALES_COLUMNS[3:]
DEFAULT_STABLE_TOLERANCE = 0.10


@dataclass(frozen=True)
class SalesRecord:
    course_id: str
    semester: str
    subject: str
    active_users: int
    completers: int
    paper_certs: int
    verified_certs: int

    @property
    def paying_users(self) -> int:
        return self.paper_certs + self.verified_certs


@dataclass(frozen=True)
class WtpBuckets:
    positive: int
    mid: int
    high: int


@dataclass(frozen=True)
class TierPrices:
    paper_price: Money = Money(10000)
    verified_price: Money = Money(30000)

    def __post_init__(self):
        object.__setattr__(self, "paper_price", as_money(self.paper_price))
        object.__setattr__(self, "verified_price", as_money(self.verified_price))
        if not 0 < self.paper_price.cents < self.verified_price.cents:
            raise ValueError("need 0 < paper_price < verified_price")


def _check_invariants(rec: SalesRecord, row: int | None = None):
    for col in COUNT_COLUMNS:
        if getattr(rec, col) < 0:
            raise InvariantViolationError(f"row {row}: {col} is negative", row=row)
    if rec.paper_certs + rec.verified_certs > rec.active_users:
        raise InvariantViolationError(
            f"row {row}: paper_certs + verified_certs ({rec.paying_users}) exceeds "
            f"active_users ({rec.active_users})", row=row)


def parse_sales(text: str, source: str = "<string>") -> list[SalesRecord]:
    """Parse sales CSV text. Row numbers in errors count the header as row 1."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        raise SchemaMismatchError(f"{source}: missing header row", row=1)
    header = [h.strip() for h in header]
    if tuple(header) != SALES_COLUMNS:
        bad = next((i for i, (a, b) in enumerate(zip(header, SALES_COLUMNS)) if a != b),
                   min(len(header), len(SALES_COLUMNS)))
        col = header[bad] if bad < len(header) else None
        raise SchemaMismatchError(
            f"{source}: header must be {','.join(SALES_COLUMNS)}", row=1, column=col)
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(SALES_COLUMNS):
            raise SchemaMismatchError(
                f"{source}: row {lineno} has {len(row)} fields, expected {len(SALES_COLUMNS)}",
                row=lineno)
        fields = dict(zip(SALES_COLUMNS, (c.strip() for c in row)))
        counts = {}
        for col in COUNT_COLUMNS:
            if not re.fullmatch(r"\d+", fields[col]):
                raise SchemaMismatchError(
                    f"{source}: row {lineno} column {col}: {fields[col]!r} is not a non-negative integer",
                    row=lineno, column=col)
            counts[col] = int(fields[col])
        rec = SalesRecord(fields["course_id"], fields["semester"], fields["subject"], **counts)
        _check_invariants(rec, lineno)
        records.append(rec)
    return records


def load_sales(path) -> list[SalesRecord]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"sales file not found: {path}")
    return parse_sales(path.read_text(encoding="utf-8"), source=str(path))


def sales_to_csv(records: Iterable[SalesRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SALES_COLUMNS)
    for r in records:
        w.writerow([getattr(r, c) for c in SALES_COLUMNS])
    return buf.getvalue()


def infer_wtp_buckets(record: SalesRecord) -> WtpBuckets:
    return WtpBuckets(positive=record.completers, mid=record.paper_certs, high=record.verified_certs)


def course_revenue(buckets: WtpBuckets, prices: TierPrices = TierPrices()) -> Money:
    return prices.paper_price * buckets.mid + prices.verified_price * buckets.high


def _as_float_array(values) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def lorenz_curve(revenues: Sequence) -> list[tuple[float, float]]:
    """Points ``(k/n, share of revenue held by the k smallest courses)``, from (0, 0) to (1, 1)."""
    x = np.sort(_as_float_array(revenues))
    if x.size == 0 or x.sum() <= 0:
        raise ZeroTotalRevenueError("Lorenz curve needs positive total revenue")
    n = x.size
    cum = np.cumsum(x) / x.sum()
    cum[-1] = 1.0
    return [(0.0, 0.0)] + [((k + 1) / n, float(c)) for k, c in enumerate(cum)]


def lorenz_area(points: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under a Lorenz curve."""
    return float(sum((x1 - x0) * (y0 + y1) / 2 for (x0, y0), (x1, y1) in zip(points, points[1:])))


def gini(revenues: Sequence) -> float:
    """Population Gini coefficient ``sum_ij |x_i - x_j| / (2 n^2 mean)``.

    The double sum is evaluated in O(n log n) from the sorted values:
    ``sum_ij |x_i - x_j| = 2 * sum_i (2i - n - 1) x_(i)`` with 1-based ranks.
    """
    x = np.sort(_as_float_array(revenues))
    n = x.size
    if n == 0 or x.mean() <= 0:
        raise ZeroMeanError("Gini coefficient needs a positive mean")
    ranks = np.arange(1, n + 1)
    pair_sum = 2.0 * float(np.sum((2 * ranks - n - 1) * x))
    return pair_sum / (2.0 * n * n * x.mean())


def top_share(revenues: Sequence, fraction: float) -> float:
    """Share of total revenue earned by the ``ceil(fraction * n)`` highest earners."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    x = np.sort(_as_float_array(revenues))[::-1]
    if x.size == 0 or x.sum() <= 0:
        raise ZeroTotalRevenueError("top share needs positive total revenue")
    k = math.ceil(Fraction(str(fraction)) * x.size)
    return float(x[:k].sum() / x.sum())


def payment_rate(record: SalesRecord) -> float:
    """Paying users per completer.

    Payers are assumed to be a subset of completers. Records that break that
    assumption give a rate above 1; the value is returned as is.
    """
    if record.completers <= 0:
        raise NoCompletersError(f"course {record.course_id!r} ({record.semester}) has no completers")
    return record.paying_users / record.completers


_SEASONS = {"winter": 0, "spring": 1, "summer": 2, "fall": 3, "autumn": 3}


def semester_key(semester: str) -> tuple[int, int]:
    """Chronological sort key for labels like ``Fall 2015``, ``2016-Spring`` or ``2016``."""
    text = semester.strip().lower()
    year = re.search(r"\d{4}", text)
    if not year:
        raise ValueError(f"cannot place semester {semester!r} in time")
    season = next((v for k, v in _SEASONS.items() if k in text), -1)
    return int(year.group()), season


@dataclass(frozen=True)
class OfferingMix:
    semester: str
    completers: int
    mid_share: float | None  # mid / positive
    high_share: float | None  # high / positive
    verified_share: float | None  # high / (mid + high)


@dataclass(frozen=True)
class OfferingComparison:
    course_id: str
    offerings: tuple[OfferingMix, ...]
    declining_totals: bool
    stable_mix: bool
    max_mix_gap: float


def _ratio(a: int, b: int) -> float | None:
    return a / b if b else None


def compare_offerings(records: Sequence[SalesRecord],
                      tolerance: float = DEFAULT_STABLE_TOLERANCE) -> OfferingComparison:
    """Compare repeat offerings of one course.

    Offerings are put in chronological order. ``declining_totals`` holds when
    completers strictly fall from each offering to the next. ``stable_mix``
    holds when the verified share of paid certificates, ``high / (mid + high)``,
    varies by at most ``tolerance`` across offerings that sold any.
    """
    if len(records) < 2:
        raise TooFewOfferingsError("need at least two offerings to compare")
    ids = {r.course_id for r in records}
    if len(ids) != 1:
        raise MixedCourseIdsError(f"offerings span several courses: {sorted(ids)}")
    sems = [r.semester for r in records]
    if len(set(sems)) != len(sems):
        raise ValueError("offerings must have distinct semesters")
    ordered = sorted(records, key=lambda r: semester_key(r.semester))
    mixes = []
    for r in ordered:
        b = infer_wtp_buckets(r)
        mixes.append(OfferingMix(r.semester, r.completers, _ratio(b.mid, b.positive),
                                 _ratio(b.high, b.positive), _ratio(b.high, b.mid + b.high)))
    shares = [m.verified_share for m in mixes if m.verified_share is not None]
    gap = max(shares) - min(shares) if shares else 0.0
    declining = all(b.completers < a.completers for a, b in zip(ordered, ordered[1:]))
    return OfferingComparison(ordered[0].course_id, tuple(mixes), declining, gap <= tolerance, gap)


def scatter_data(records: Iterable[SalesRecord]) -> list[tuple[int, int]]:
    """``(active_users, paying_users)`` per record, in input order."""
    return [(r.active_users, r.paying_users) for r in records]


def summarize(records: Sequence[SalesRecord], prices: TierPrices = TierPrices(),
              top_fraction: float = 0.15, tolerance: float = DEFAULT_STABLE_TOLERANCE) -> dict:
    """JSON-ready summary of a sales table.

    Inequality measures are ``None`` when there is nothing to measure (no
    records or zero total revenue).
    """
    revenues = [course_revenue(infer_wtp_buckets(r), prices) for r in records]
    courses = []
    for r, rev in zip(records, revenues):
        b = infer_wtp_buckets(r)
        courses.append({
            "course_id": r.course_id,
            "semester": r.semester,
            "subject": r.subject,
            "buckets": {"positive": b.positive, "mid": b.mid, "high": b.high},
            "revenue": str(rev),
            "payment_rate": payment_rate(r) if r.completers > 0 else None,
        })
    total = sum(rev.cents for rev in revenues)
    has_revenue = total > 0
    by_course: dict[str, list[SalesRecord]] = {}
    for r in records:
        by_course.setdefault(r.course_id, []).append(r)
    repeats = []
    for cid, group in by_course.items():
        if len(group) < 2:
            continue
        cmp = compare_offerings(group, tolerance)
        repeats.append({
            "course_id": cid,
            "declining_totals": cmp.declining_totals,
            "stable_mix": cmp.stable_mix,
            "max_mix_gap": cmp.max_mix_gap,
            "offerings": [
                {"semester": m.semester, "completers": m.completers, "mid_share": m.mid_share,
                 "high_share": m.high_share, "verified_share": m.verified_share}
                for m in cmp.offerings
            ],
        })
    return {
        "n_courses": len(records),
        "total_revenue": str(Money(total)),
        "gini": gini(revenues) if has_revenue else None,
        "top_fraction": top_fraction,
        "top_share": top_share(revenues, top_fraction) if has_revenue else None,
        "tier_prices": {"paper": str(prices.paper_price), "verified": str(prices.verified_price)},
        "courses": courses,
        "repeat_offerings": repeats,
    }
