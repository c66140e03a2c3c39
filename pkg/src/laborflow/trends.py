"""Yearly labor-flux series, OLS trend fits, and the flux/market-cap regression."""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Collection, Iterable, Mapping, Sequence
from dataclasses import dataclass

from .overrep import log_odds_pair
from .records import EmploymentSpell, TransitionRecord


@dataclass(frozen=True)
class FluxSeries:
    """Yearly influx/outflux of one unit (region, industry, or cluster)."""

    unit: str
    years: tuple[int, ...]
    influx: tuple[float, ...]
    outflux: tuple[float, ...]

    def log_ratio(self, smooth: float = 0.0) -> tuple[float | None, ...]:
        """ln(influx/outflux) per year; None where either side is zero.

        ``smooth`` adds a pseudo-count to both sides (e.g. 1.0), making every
        year defined at the cost of biasing small units; off by default.
        """
        return tuple(
            math.log((i + smooth) / (o + smooth)) if i + smooth > 0 and o + smooth > 0 else None
            for i, o in zip(self.influx, self.outflux)
        )

    def total_log_ratio(self, smooth: float = 0.0) -> float | None:
        ti, to = sum(self.influx) + smooth, sum(self.outflux) + smooth
        return math.log(ti / to) if ti > 0 and to > 0 else None


def flux_series(
    transitions: Sequence[TransitionRecord],
    spells: Sequence[EmploymentSpell],
    unit_of: Mapping,
    years: Sequence[int],
    members: Collection | None = None,
    include_first_jobs: bool = True,
    include_last_jobs: bool = True,
) -> tuple[dict, list]:
    """Aggregate cross-unit moves into per-unit yearly influx/outflux.

    Moves inside one unit are ignored; moves to or from firms outside the
    grouping count on the mapped side only. First recorded jobs add to
    influx and fully-ended histories add to outflux when the respective
    toggles are on. ``members`` restricts to a member subset (e.g. degree
    holders). Returns (series by unit, units with no activity at all).
    """
    years = tuple(years)
    year_pos = {y: i for i, y in enumerate(years)}
    influx: dict = defaultdict(lambda: [0.0] * len(years))
    outflux: dict = defaultdict(lambda: [0.0] * len(years))

    def allowed(member) -> bool:
        return members is None or member in members

    for rec in transitions:
        if not allowed(rec.member_id):
            continue
        pos = year_pos.get(rec.start_month.year)
        if pos is None:
            continue
        u_from = unit_of.get(rec.from_firm)
        u_to = unit_of.get(rec.to_firm)
        if u_from is None and u_to is None:
            continue
        if u_from == u_to:
            continue
        if u_to is not None:
            influx[u_to][pos] += 1.0
        if u_from is not None:
            outflux[u_from][pos] += 1.0

    if include_first_jobs or include_last_jobs:
        by_member: dict = defaultdict(list)
        for sp in spells:
            if allowed(sp.member_id):
                by_member[sp.member_id].append(sp)
        for mem_spells in by_member.values():
            if include_first_jobs:
                first = min(sp.start_month for sp in mem_spells)
                for sp in mem_spells:
                    if sp.start_month == first:
                        unit = unit_of.get(sp.firm)
                        pos = year_pos.get(sp.start_month.year)
                        if unit is not None and pos is not None:
                            influx[unit][pos] += 1.0
            if include_last_jobs and all(sp.end_month is not None for sp in mem_spells):
                last = max(sp.end_month for sp in mem_spells)
                for sp in mem_spells:
                    if sp.end_month == last:
                        unit = unit_of.get(sp.firm)
                        pos = year_pos.get(last.year)
                        if unit is not None and pos is not None:
                            outflux[unit][pos] += 1.0

    active = sorted(set(influx) | set(outflux), key=str)
    series = {
        u: FluxSeries(
            unit=str(u),
            years=years,
            influx=tuple(influx[u]),
            outflux=tuple(outflux[u]),
        )
        for u in active
    }
    all_units = {u for u in unit_of.values() if u is not None}
    inactive = sorted(all_units - set(active), key=str)
    return series, inactive


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    slope_se: float
    n: int


def ols_trend(points: Iterable[tuple[float, float | None]]) -> TrendFit:
    """Closed-form OLS line through (t, y) pairs; None y values are skipped."""
    pts = [(float(t), float(y)) for t, y in points if y is not None]
    n = len(pts)
    if n < 2:
        raise ValueError(f"OLS needs at least 2 points, got {n}")
    mt = sum(t for t, _ in pts) / n
    my = sum(y for _, y in pts) / n
    sxx = sum((t - mt) ** 2 for t, _ in pts)
    if sxx <= 0.0:
        raise ValueError("zero variance in the time axis")
    sxy = sum((t - mt) * (y - my) for t, y in pts)
    slope = sxy / sxx
    intercept = my - slope * mt
    if n > 2:
        rss = sum((y - (slope * t + intercept)) ** 2 for t, y in pts)
        slope_se = math.sqrt(rss / (n - 2) / sxx)
    else:
        slope_se = 0.0
    return TrendFit(slope=slope, intercept=intercept, slope_se=slope_se, n=n)


@dataclass(frozen=True)
class UnitTrendRow:
    unit: str
    beta_flux: float
    beta_marketcap: float
    se_flux: float
    se_marketcap: float


@dataclass(frozen=True)
class TrendRegression:
    """Second-stage fit of market-cap trends on labor-flux trends."""

    beta: float
    intercept: float
    beta_se: float
    correlation: float
    rows: tuple[UnitTrendRow, ...]
    dropped: tuple[tuple[str, str], ...]


def _pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sx = math.sqrt(sum((x - mx) ** 2 for x in xs))
    sy = math.sqrt(sum((y - my) ** 2 for y in ys))
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / (sx * sy)


def unit_marketcap_points(
    unit_firms: Collection,
    marketcap: Mapping,
    window: tuple[int, int],
) -> list[tuple[int, float | None]]:
    """Per-year log of summed market cap over a unit's firms (missing years None)."""
    lo, hi = window
    points: list[tuple[int, float | None]] = []
    for year in range(lo, hi + 1):
        total = 0.0
        seen = False
        for firm in unit_firms:
            value = marketcap.get(firm, {}).get(year)
            if value is not None:
                total += value
                seen = True
        points.append((year, math.log(total) if seen and total > 0 else None))
    return points


def trend_regression(
    flux_by_unit: Mapping[str, FluxSeries],
    marketcap: Mapping,
    unit_of: Mapping,
    mc_window: tuple[int, int] = (2011, 2014),
    flux_window: tuple[int, int] = (2010, 2014),
) -> TrendRegression:
    """Fit beta_MC = beta * beta_LF + mu across units.

    Market cap is summed within a unit per year, logged, and OLS-fitted over
    ``mc_window``; the flux trend is the OLS slope of the yearly log flux
    ratio over ``flux_window``. Units missing either fit are dropped with a
    reason; fewer than two surviving units is a degenerate regression.
    """
    firms_by_unit: dict = defaultdict(list)
    for firm, unit in unit_of.items():
        if unit is not None:
            firms_by_unit[unit].append(firm)

    rows = []
    dropped = []
    for unit in sorted(flux_by_unit, key=str):
        series = flux_by_unit[unit]
        lr_points = [
            (year, lr)
            for year, lr in zip(series.years, series.log_ratio())
            if flux_window[0] <= year <= flux_window[1]
        ]
        try:
            flux_fit = ols_trend(lr_points)
        except ValueError as exc:
            dropped.append((str(unit), f"flux: {exc}"))
            continue
        mc_points = unit_marketcap_points(firms_by_unit.get(unit, ()), marketcap, mc_window)
        try:
            mc_fit = ols_trend(mc_points)
        except ValueError as exc:
            dropped.append((str(unit), f"marketcap: {exc}"))
            continue
        rows.append(
            UnitTrendRow(
                unit=str(unit),
                beta_flux=flux_fit.slope,
                beta_marketcap=mc_fit.slope,
                se_flux=flux_fit.slope_se,
                se_marketcap=mc_fit.slope_se,
            )
        )
    for unit in sorted(set(map(str, firms_by_unit)) - set(map(str, flux_by_unit)), key=str):
        dropped.append((unit, "flux: no series"))

    if len(rows) < 2:
        raise ValueError(f"second-stage regression needs >= 2 units, got {len(rows)}")
    xs = [r.beta_flux for r in rows]
    ys = [r.beta_marketcap for r in rows]
    fit = ols_trend(zip(xs, ys))
    return TrendRegression(
        beta=fit.slope,
        intercept=fit.intercept,
        beta_se=fit.slope_se,
        correlation=_pearson(xs, ys),
        rows=tuple(rows),
        dropped=tuple(dropped),
    )


@dataclass(frozen=True)
class QuartileSkillRow:
    skill: str
    p_top: float
    p_bottom: float
    z: float


@dataclass(frozen=True)
class QuartileSkillReport:
    rows: tuple[QuartileSkillRow, ...]
    top_units: tuple[str, ...]
    bottom_units: tuple[str, ...]
    n_top_members: int
    n_bottom_members: int


def quartile_skills(
    metric_by_unit: Mapping[str, float],
    members_by_unit: Mapping[str, Collection],
    member_skills: Mapping,
    prior_strength: float | None = None,
) -> QuartileSkillReport:
    """Compare skill prevalence between top- and bottom-quartile units.

    Units are ranked by the metric; members of the top and bottom n//4 units
    are pooled (deduplicated within each pool). p is the fraction of pool
    members holding a skill; z comes from the log-odds machinery with the
    combined pool as the prior corpus.
    """
    units = sorted(metric_by_unit, key=lambda u: (-metric_by_unit[u], str(u)))
    n = len(units)
    if n < 4:
        raise ValueError(f"quartile analysis needs >= 4 units, got {n}")
    q = n // 4
    top_units = tuple(str(u) for u in units[:q])
    bottom_units = tuple(str(u) for u in units[-q:])

    def pool(unit_ids) -> set:
        members: set = set()
        for u in unit_ids:
            members.update(members_by_unit.get(u, ()))
        return members

    top_members = pool(units[:q])
    bottom_members = pool(units[-q:])

    def skill_counts(members) -> dict:
        counts: dict = defaultdict(int)
        for m in members:
            for skill in set(member_skills.get(m, ())):
                counts[skill] += 1
        return dict(counts)

    counts_top = skill_counts(top_members)
    counts_bottom = skill_counts(bottom_members)
    prior: dict = defaultdict(int)
    for counts in (counts_top, counts_bottom):
        for skill, c in counts.items():
            prior[skill] += c
    scores = log_odds_pair(counts_top, counts_bottom, prior, prior_strength)

    nt = max(len(top_members), 1)
    nb = max(len(bottom_members), 1)
    rows = tuple(
        QuartileSkillRow(
            skill=s.label,
            p_top=counts_top.get(s.label, 0) / nt,
            p_bottom=counts_bottom.get(s.label, 0) / nb,
            z=s.z,
        )
        for s in scores
    )
    return QuartileSkillReport(
        rows=rows,
        top_units=top_units,
        bottom_units=bottom_units,
        n_top_members=len(top_members),
        n_bottom_members=len(bottom_members),
    )
