"""Command-line interface: ``moocpricing {optimize,budget,estimate,analyze}``.

Each subcommand reads an optional JSON config, applies flag overrides, logs
the resolved config, and writes JSON reports and CSV tables into ``--out``.
Every output embeds the SHA-256 of the resolved config.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import sys
from pathlib import Path

import click

from . import analytics, budget_choice, market_core, population, stackelberg
from .errors import AllBelowCostError, DataError, MoocPricingError
from .money import Money, as_money, cents_to_decimal

_LOGGER = logging.getLogger("moocpricing")

CONFIG_ERROR = 2
DATA_ERROR = 3
SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def resolve_config(config_path, overrides: dict) -> tuple[dict, Path]:
    """Merge the config file with non-None flag overrides (flags win)."""
    base = Path.cwd()
    cfg: dict = {}
    if config_path is not None:
        path = Path(config_path)
        try:
            cfg = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        base = path.resolve().parent
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = value
    cfg.setdefault("schema_version", SCHEMA_VERSION)
    return cfg, base


def config_hash(cfg: dict) -> str:
    """Digest of the resolved config; the output directory is excluded."""
    hashed = {k: v for k, v in cfg.items() if k != "out"}
    canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _write_csv(path: Path, text: str, digest: str):
    path.write_text(f"# config_hash: {digest}\n" + text, encoding="utf-8")


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _resolve_path(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _money(cfg: dict, key: str, default="0") -> Money:
    try:
        return as_money(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _price_grid(cfg: dict, key: str = "price_grid"):
    grid = cfg.get(key)
    if grid is None:
        return None
    if isinstance(grid, dict):
        start, stop, step = (as_money(grid[k]).cents for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError(f"{key}: need step > 0 and stop >= start")
        return [Money(c) for c in range(start, stop + 1, step)]
    if not isinstance(grid, list):
        raise ConfigError(f"{key} must be a list or a {{start, stop, step}} object")
    return sorted({as_money(p) for p in grid})


def _load_population(cfg: dict, base: Path) -> market_core.Population:
    seed = cfg.get("seed")
    if "users" in cfg:
        return market_core.Population(
            market_core.UserProfile(str(u.get("id", f"u{i + 1}")), u["wtp"], u.get("audit", 0))
            for i, u in enumerate(cfg["users"]))
    if "population_csv" in cfg:
        path = _resolve_path(base, cfg["population_csv"])
        if not path.is_file():
            raise DataError(f"population CSV not found: {path}")
        try:
            return population.population_from_csv(path.read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: {exc}") from None
    if "population" in cfg:
        return population.generate_population(population.population_spec_from_dict(cfg["population"], seed))
    raise ConfigError("provide one of 'users', 'population_csv' or 'population'")


def common_options(func):
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="JSON config file.")
    @click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Random seed.")
    @click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                  help="Output directory.")
    @click.option("--tie-rule", type=click.Choice(["weak", "strict"]), default=None,
                  help="Indifferent users buy (weak) or audit (strict).")
    @click.option("--marginal-cost", type=str, default=None, help="Per-certificate cost.")
    @functools.wraps(func)
    def wrapper(config_path, seed, out, tie_rule, marginal_cost, **kwargs):
        overrides = {"seed": seed, "out": out, "tie_rule": tie_rule, "marginal_cost": marginal_cost}
        overrides.update({k: v for k, v in kwargs.items()})
        try:
            cfg, base = resolve_config(config_path, overrides)
            _LOGGER.info("resolved config: %s", json.dumps(cfg, sort_keys=True, default=str))
            digest = config_hash(cfg)
            out_dir = _resolve_path(Path.cwd(), cfg.get("out", "out"))
            out_dir.mkdir(parents=True, exist_ok=True)
            func(cfg, base, out_dir, digest)
        except ConfigError as exc:
            _fail(CONFIG_ERROR, str(exc))
        except DataError as exc:
            _fail(DATA_ERROR, str(exc))
        except (MoocPricingError, ValueError, KeyError, TypeError) as exc:
            _fail(CONFIG_ERROR, f"invalid configuration: {exc}")
    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log the resolved config and progress.")
def main(verbose):
    """Certificate pricing models and sales analytics."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@main.command()
@common_options
def optimize(cfg, base, out_dir, digest):
    """Profit-maximizing price for one course."""
    rule = market_core.TieRule.parse(cfg.get("tie_rule", "weak"))
    c = _money(cfg, "marginal_cost")
    pop = _load_population(cfg, base)
    if len(pop) == 0:
        raise ConfigError("population is empty")
    try:
        opt = market_core.optimal_price(pop, c, rule)
    except AllBelowCostError as exc:
        opt = exc.result
    grid = _price_grid(cfg) or market_core.candidate_prices(pop, c)
    curve = market_core.demand_curve(pop, grid, c, rule)
    report = {
        "config_hash": digest,
        "schema_version": SCHEMA_VERSION,
        "population_size": len(pop),
        "marginal_cost": str(c),
        "tie_rule": rule.value,
        "optimal_price": str(opt.price),
        "profit": str(opt.profit),
        "demand": opt.demand,
        "all_below_cost": opt.all_below_cost,
        "welfare_at_optimum": str(market_core.social_welfare(pop, opt.price, c, rule)),
        "welfare_at_cost": str(market_core.social_welfare(pop, c, c, rule)),
    }
    _write_json(out_dir / "optimize_report.json", report)
    _write_csv(out_dir / "demand_curve.csv",
               _csv(["price", "demand", "profit"], [(s.price, s.demand, s.profit) for s in curve.samples]),
               digest)
    click.echo(f"optimal price {opt.price}: demand {opt.demand}, profit {opt.profit}")


@main.command()
@common_options
def budget(cfg, base, out_dir, digest):
    """Budget-constrained multi-course purchases and uniform pricing."""
    c = _money(cfg, "marginal_cost")
    inst = cfg.get("instance")
    if isinstance(inst, str):
        path = _resolve_path(base, inst)
        if not path.is_file():
            raise DataError(f"instance file not found: {path}")
        try:
            users, schedule = budget_choice.load_instance(path.read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: {exc}") from None
    elif isinstance(inst, dict):
        users, schedule = budget_choice.instance_from_dict(inst)
    elif "population" in cfg:
        spec = population.multi_population_spec_from_dict(cfg["population"], cfg.get("seed"))
        users, schedule = population.generate_multi_population(spec), None
        if "prices" in cfg:
            schedule = budget_choice.PriceSchedule(tuple(cfg["prices"]))
    else:
        raise ConfigError("provide 'instance' (path or object) or a multi-course 'population'")
    if not users:
        raise ConfigError("instance has no users")

    report = {"config_hash": digest, "schema_version": SCHEMA_VERSION, "marginal_cost": str(c),
              "n_users": len(users)}
    if schedule is not None:
        rows = []
        for u in users:
            sel = budget_choice.solve_user_purchase(u, schedule)
            rows.append({"id": u.id, "chosen": list(sel.indices), "total_spend": str(sel.total_spend),
                         "surplus": str(sel.surplus), "count": sel.count})
        report["prices"] = [str(p) for p in schedule.prices]
        report["selections"] = rows
        _write_csv(out_dir / "selections.csv",
                   _csv(["id", "chosen", "total_spend", "surplus", "count"],
                        [(r["id"], " ".join(map(str, r["chosen"])), r["total_spend"], r["surplus"], r["count"])
                         for r in rows]), digest)
    try:
        opt = budget_choice.optimal_uniform_price(users, c)
    except AllBelowCostError as exc:
        opt = exc.result
    report["optimal_uniform_price"] = {"price": str(opt.price), "profit": str(opt.profit),
                                       "certificates_sold": opt.certificates_sold,
                                       "all_below_cost": opt.all_below_cost}
    grid = _price_grid(cfg) or budget_choice.uniform_price_candidates(users)
    curve = []
    for p in grid:
        if p.cents <= 0:
            continue
        sold = budget_choice.aggregate_uniform_demand(users, p)
        curve.append((p, sold, cents_to_decimal(sold * (p.cents - c.cents))))
    _write_csv(out_dir / "uniform_demand.csv", _csv(["price", "certificates", "profit"], curve), digest)
    _write_json(out_dir / "budget_report.json", report)
    click.echo(f"optimal uniform price {opt.price}: {opt.certificates_sold} certificates, profit {opt.profit}")


@main.command()
@common_options
def estimate(cfg, base, out_dir, digest):
    """Estimate the net-WTP survival curve from price experiments."""
    rule = market_core.TieRule.parse(cfg.get("tie_rule", "weak"))
    pop = None
    if "experiments_csv" in cfg:
        path = _resolve_path(base, cfg["experiments_csv"])
        if not path.is_file():
            raise DataError(f"experiments CSV not found: {path}")
        try:
            experiments = stackelberg.experiments_from_csv(path.read_text(encoding="utf-8"))
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: {exc}") from None
    else:
        prices = cfg.get("prices")
        if not prices:
            raise ConfigError("'prices' must be a non-empty list")
        prices = [as_money(p) for p in prices]
        pop = _load_population(cfg, base)
        seed = cfg.get("noise_seed", cfg.get("seed", 0))
        experiments = stackelberg.run_price_experiments(
            pop, prices, rule, noise=float(cfg.get("noise", 0.0)),
            noise_model=cfg.get("noise_model", "tremble"),
            sample_size=cfg.get("sample_size"), seed=seed)
    survival = stackelberg.estimate_wtp_survival(experiments)
    report = {"config_hash": digest, "schema_version": SCHEMA_VERSION, "tie_rule": rule.value,
              "n_experiments": len(experiments),
              "survival": [{"price": str(p), "survival": s} for p, s in survival]}
    if pop is not None:
        truth = stackelberg.true_survival(pop, survival.prices, rule)
        errors = [abs(s - t) for s, t in zip(survival.survival, truth)]
        report["comparison"] = {
            "population_size": len(pop),
            "true_survival": truth,
            "abs_error": errors,
            "max_abs_error": max(errors),
        }
    _write_csv(out_dir / "experiments.csv", stackelberg.experiments_to_csv(experiments), digest)
    _write_csv(out_dir / "survival.csv", survival.to_csv(), digest)
    _write_json(out_dir / "estimate_report.json", report)
    click.echo(f"estimated survival at {len(survival)} prices")


@main.command()
@click.option("--sales", "sales_csv", type=click.Path(dir_okay=False, resolve_path=True), default=None,
              help="Sales CSV (overrides config).")
@common_options
def analyze(cfg, base, out_dir, digest):
    """Revenue inequality, WTP buckets and payment rates from sales data."""
    if "sales_csv" not in cfg:
        raise ConfigError("'sales_csv' is required")
    records = analytics.load_sales(_resolve_path(base, cfg["sales_csv"]))
    tiers = cfg.get("tier_prices", {})
    prices = analytics.TierPrices(as_money(tiers.get("paper", 100)), as_money(tiers.get("verified", 300)))
    summary = analytics.summarize(records, prices, float(cfg.get("top_fraction", 0.15)),
                                  float(cfg.get("stable_tolerance", analytics.DEFAULT_STABLE_TOLERANCE)))
    summary = {"config_hash": digest, "schema_version": SCHEMA_VERSION, **summary}
    revenues = [analytics.course_revenue(analytics.infer_wtp_buckets(r), prices) for r in records]
    points = analytics.lorenz_curve(revenues) if sum(r.cents for r in revenues) > 0 else []
    _write_csv(out_dir / "lorenz.csv", _csv(["population_fraction", "revenue_fraction"],
                                            [(repr(x), repr(y)) for x, y in points]), digest)
    _write_csv(out_dir / "scatter.csv", _csv(["active_users", "paying_users"],
                                             analytics.scatter_data(records)), digest)
    _write_json(out_dir / "summary.json", summary)
    click.echo(f"analyzed {len(records)} course offerings")


if __name__ == "__main__":
    main()
