"""Seeded synthetic user populations.

Reproducibility contract: every population is drawn from numpy's ``PCG64``
bit generator seeded with ``spec.seed``, consuming uniforms with
``Generator.random`` in a fixed order, and every distribution is sampled by
inverse CDF from those uniforms. Values are rounded to cents half-to-even.

Draw order for :func:`generate_population`:

1. ``size`` uniforms for WTP;
2. ``size`` uniforms for audit utility (only for an independent audit
   distribution; a fraction-of-WTP audit draws nothing).

Draw order for :func:`generate_multi_population`:

1. ``size * n_courses`` uniforms for WTP, row-major (user, course). With a
   correlation ``rho > 0`` these are instead ``size`` latent normals followed
   by ``size * n_courses`` idiosyncratic normals, mixed as
   ``sqrt(rho) * z_user + sqrt(1 - rho) * e`` and mapped through the normal CDF;
2. ``size * n_courses`` uniforms for audit (independent audit only);
3. ``size`` uniforms for budgets;
4. ``size`` uniforms for course caps.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .budget_choice import MultiCourseUser
from .errors import InvalidSpecError
from .market_core import Population, UserProfile
from .money import Money


@dataclass(frozen=True)
class PointMass:
    value: float

    def validate(self):
        if not self.value >= 0:
            raise InvalidSpecError("point mass value must be non-negative")

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(u, float(self.value), dtype=float)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def validate(self):
        if not 0 <= self.lo <= self.hi:
            raise InvalidSpecError(f"uniform needs 0 <= lo <= hi, got ({self.lo}, {self.hi})")

    def ppf(self, u):
        return self.lo + (self.hi - self.lo) * u


@dataclass(frozen=True)
class TruncatedLognormal:
    """``exp(N(mu, sigma^2))`` conditioned on being at most ``cap``."""

    mu: float
    sigma: float
    cap: float

    def validate(self):
        if self.sigma < 0:
            raise InvalidSpecError("lognormal sigma must be >= 0")
        if not self.cap > 0:
            raise InvalidSpecError("lognormal cap must be positive")
        if self.sigma == 0 and math.exp(self.mu) > self.cap:
            raise InvalidSpecError("degenerate lognormal lies above its cap")

    def ppf(self, u):
        if self.sigma == 0:
            return np.full_like(u, math.exp(self.mu), dtype=float)
        upper = ndtr((math.log(self.cap) - self.mu) / self.sigma)
        return np.minimum(np.exp(self.mu + self.sigma * ndtri(u * upper)), self.cap)


@dataclass(frozen=True)
class Empirical:
    """Resample uniformly from a fixed list of values."""

    values: tuple[float, ...]

    def validate(self):
        if not self.values:
            raise InvalidSpecError("empirical distribution needs at least one value")
        if any(not v >= 0 for v in self.values):
            raise InvalidSpecError("empirical values must be non-negative")

    def ppf(self, u):
        vals = np.asarray(self.values, dtype=float)
        idx = np.minimum((u * len(vals)).astype(np.int64), len(vals) - 1)
        return vals[idx]


@dataclass(frozen=True)
class AuditFraction:
    """Audit utility as a fixed fraction of the user's WTP."""

    factor: float

    def validate(self):
        if not 0 <= self.factor <= 1:
            raise InvalidSpecError("audit fraction must be in [0, 1]")


Distribution = Union[PointMass, Uniform, TruncatedLognormal, Empirical]

DEFAULT_WTP = TruncatedLognormal(mu=4.0, sigma=1.5, cap=5000.0)


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    wtp: Distribution = DEFAULT_WTP
    audit: Union[Distribution, AuditFraction] = AuditFraction(0.2)
    seed: int = 0

    def validate(self):
        if self.size < 0:
            raise InvalidSpecError("population size must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError("seed must be an unsigned 64-bit integer")
        self.wtp.validate()
        self.audit.validate()


@dataclass(frozen=True)
class MultiPopulationSpec:
    size: int
    n_courses: int
    wtp: Distribution = DEFAULT_WTP
    audit: Union[Distribution, AuditFraction] = AuditFraction(0.2)
    budget: Distribution = Uniform(0.0, 1000.0)
    max_courses: Distribution = field(default_factory=lambda: PointMass(3))
    correlation: float = 0.0
    seed: int = 0

    def validate(self):
        if self.size < 0:
            raise InvalidSpecError("population size must be >= 0")
        if self.n_courses < 0:
            raise InvalidSpecError("n_courses must be >= 0")
        if not 0 <= self.correlation <= 1:
            raise InvalidSpecError("correlation must be in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError("seed must be an unsigned 64-bit integer")
        for d in (self.wtp, self.audit, self.budget, self.max_courses):
            d.validate()


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def to_cents(values: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(values, dtype=float) * 100.0).astype(np.int64)


def _audit_cents(audit, wtp_cents: np.ndarray, rng) -> np.ndarray:
    if isinstance(audit, AuditFraction):
        return to_cents(wtp_cents / 100.0 * audit.factor)
    return to_cents(audit.ppf(rng.random(wtp_cents.shape)))


def generate_population(spec: PopulationSpec) -> Population:
    """Draw a single-course population; see the module docstring for draw order."""
    spec.validate()
    rng = make_rng(spec.seed)
    wtp = to_cents(spec.wtp.ppf(rng.random(spec.size)))
    audit = _audit_cents(spec.audit, wtp, rng)
    width = len(str(spec.size))
    return Population(
        UserProfile(f"u{i + 1:0{width}d}", Money(int(w)), Money(int(a)))
        for i, (w, a) in enumerate(zip(wtp, audit))
    )


def generate_multi_population(spec: MultiPopulationSpec) -> list[MultiCourseUser]:
    """Draw a multi-course population; see the module docstring for draw order."""
    spec.validate()
    rng = make_rng(spec.seed)
    shape = (spec.size, spec.n_courses)
    if spec.correlation > 0:
        z = rng.standard_normal(spec.size)
        e = rng.standard_normal(shape)
        rho = spec.correlation
        u = ndtr(math.sqrt(rho) * z[:, None] + math.sqrt(1 - rho) * e)
    else:
        u = rng.random(shape)
    wtp = to_cents(spec.wtp.ppf(u))
    audit = _audit_cents(spec.audit, wtp, rng)
    budget = to_cents(spec.budget.ppf(rng.random(spec.size)))
    caps = np.clip(np.floor(spec.max_courses.ppf(rng.random(spec.size))), 0, spec.n_courses).astype(int)
    width = len(str(spec.size))
    return [
        MultiCourseUser(
            id=f"u{i + 1:0{width}d}",
            wtp=tuple(Money(int(c)) for c in wtp[i]),
            audit=tuple(Money(int(c)) for c in audit[i]),
            budget=Money(int(budget[i])),
            max_courses=int(caps[i]),
        )
        for i in range(spec.size)
    ]


# -- spec parsing / CSV export ----------------------------------------------

def distribution_from_dict(doc) -> Union[Distribution, AuditFraction]:
    """Parse ``{"kind": ..., params}``; a bare number means a point mass."""
    if isinstance(doc, (int, float)):
        return PointMass(float(doc))
    try:
        kind = doc["kind"]
        if kind == "point":
            return PointMass(float(doc["value"]))
        if kind == "uniform":
            return Uniform(float(doc["lo"]), float(doc["hi"]))
        if kind == "lognormal":
            return TruncatedLognormal(float(doc["mu"]), float(doc["sigma"]), float(doc["cap"]))
        if kind == "empirical":
            return Empirical(tuple(float(v) for v in doc["values"]))
        if kind == "fraction":
            return AuditFraction(float(doc["factor"]))
    except (KeyError, TypeError) as exc:
        raise InvalidSpecError(f"bad distribution spec {doc!r}") from exc
    raise InvalidSpecError(f"unknown distribution kind {kind!r}")


def population_spec_from_dict(doc: dict, seed: int | None = None) -> PopulationSpec:
    try:
        spec = PopulationSpec(
            size=int(doc["size"]),
            wtp=distribution_from_dict(doc["wtp"]) if "wtp" in doc else DEFAULT_WTP,
            audit=distribution_from_dict(doc["audit"]) if "audit" in doc else AuditFraction(0.2),
            seed=int(seed if seed is not None else doc.get("seed", 0)),
        )
    except KeyError as exc:
        raise InvalidSpecError(f"population spec missing {exc.args[0]!r}") from None
    if isinstance(spec.wtp, AuditFraction):
        raise InvalidSpecError("wtp cannot be a fraction")
    spec.validate()
    return spec


def multi_population_spec_from_dict(doc: dict, seed: int | None = None) -> MultiPopulationSpec:
    kw = {}
    for key in ("wtp", "audit", "budget", "max_courses"):
        if key in doc:
            kw[key] = distribution_from_dict(doc[key])
    try:
        spec = MultiPopulationSpec(
            size=int(doc["size"]),
            n_courses=int(doc["n_courses"]),
            correlation=float(doc.get("correlation", 0.0)),
            seed=int(seed if seed is not None else doc.get("seed", 0)),
            **kw,
        )
    except KeyError as exc:
        raise InvalidSpecError(f"population spec missing {exc.args[0]!r}") from None
    spec.validate()
    return spec


def population_to_csv(pop: Population | Sequence[MultiCourseUser]) -> str:
    """CSV export: ``id,wtp,audit`` or, for multi-course users,
    ``id,course,wtp,audit,budget,max_courses`` with one row per (user, course)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(pop, Population):
        w.writerow(["id", "wtp", "audit"])
        for u in pop:
            w.writerow([u.id, str(u.wtp_verified), str(u.utility_audit)])
    else:
        w.writerow(["id", "course", "wtp", "audit", "budget", "max_courses"])
        for u in pop:
            for m, (v, a) in enumerate(zip(u.wtp, u.audit)):
                w.writerow([u.id, m, str(v), str(a), str(u.budget), u.max_courses])
    return buf.getvalue()


def population_from_csv(text: str) -> Population:
    rows = [line for line in text.splitlines() if line and not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or not {"wtp", "audit"} <= set(reader.fieldnames):
        raise ValueError("population CSV needs at least wtp and audit columns")
    users = []
    for i, r in enumerate(reader):
        users.append(UserProfile(r.get("id") or f"u{i + 1}", Money.of(r["wtp"]), Money.of(r["audit"])))
    return Population(users)


# -- simulated sales tables -------------------------------------------------

#: Course popularity (active users); heavy-tailed so a few courses dominate.
DEFAULT_COURSE_SIZE = TruncatedLognormal(mu=8.0, sigma=1.6, cap=2_000_000.0)
#: Completer WTP, set so about 80% of completers clear 100 and 44% clear 300.
DEFAULT_COMPLETER_WTP = TruncatedLognormal(mu=5.5, sigma=1.1, cap=5000.0)


def simulate_sales(n_courses: int, *, course_size: Distribution = DEFAULT_COURSE_SIZE,
                   wtp: Distribution = DEFAULT_COMPLETER_WTP, completion_rate: float = 0.03,
                   paper_price: float = 100.0, verified_price: float = 300.0,
                   seed: int = 0) -> list:
    """Simulate one sales record per course offering.

    Each course draws its active-user count from ``course_size``; each active
    user completes with probability ``completion_rate``; each completer draws
    a WTP and buys the verified certificate if it is at least
    ``verified_price``, else the paper certificate if at least ``paper_price``.

    Draw order from ``PCG64(seed)``: ``n_courses`` uniforms for sizes, then per
    course one binomial completer count followed by that many WTP uniforms.
    """
    from .analytics import SalesRecord

    if n_courses < 0:
        raise InvalidSpecError("n_courses must be >= 0")
    if not 0 <= completion_rate <= 1:
        raise InvalidSpecError("completion_rate must be in [0, 1]")
    if not 0 < paper_price < verified_price:
        raise InvalidSpecError("need 0 < paper_price < verified_price")
    course_size.validate()
    wtp.validate()
    rng = make_rng(seed)
    sizes = np.floor(course_size.ppf(rng.random(n_courses))).astype(np.int64)
    width = len(str(n_courses))
    records = []
    for i, size in enumerate(sizes):
        done = int(rng.binomial(int(size), completion_rate))
        values = to_cents(wtp.ppf(rng.random(done)))
        high = int(np.count_nonzero(values >= round(verified_price * 100)))
        paying = int(np.count_nonzero(values >= round(paper_price * 100)))
        records.append(SalesRecord(f"sim{i + 1:0{width}d}", "sim", "simulated", int(size), done,
                                   paying - high, high))
    return records
