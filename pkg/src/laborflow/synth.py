"""Synthetic transition histories with planted hierarchical block structure.

The generator plants a two-layered (configurable) block hierarchy: firms in
the same block exchange workers at higher rates, block metadata aligns with
block membership, per-block attractiveness drifts over time to create flux
trends, and market caps can be coupled to the realized flux trends. All
randomness flows from one seed, so a fixed config reproduces byte-identical
files.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from itertools import product

from .records import EmploymentSpell, MemberProfile, Month, TransitionRecord
from .trends import flux_series, ols_trend

COMMON_SKILLS = (
    "spreadsheets",
    "communication",
    "project planning",
    "sales",
    "operations",
    "customer service",
    "negotiation",
    "logistics",
    "data analysis",
    "recruiting",
)


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the planted-hierarchy generator.

    ``branching`` gives blocks per level below the root; ``level_rates``
    gives relative transition rates by the depth of the deepest common block
    (root first, same-leaf-block last), so it needs len(branching)+1 entries.
    """

    branching: tuple[int, ...] = (4, 3)
    firms_per_block: int = 25
    members_per_firm: int = 20
    level_rates: tuple[float, ...] = (1.0, 10.0, 60.0)
    industry_alignment: float = 0.9
    region_alignment: float = 0.9
    start_year: int = 2010
    end_year: int = 2014
    monthly_move_prob: float = 0.03
    degree_prob: float = 0.8
    n_common_skills: int = 5
    skills_per_member: int = 3
    trend_range: float = 0.4
    mc_coupling: float | None = 0.5
    mc_noise_sd: float = 0.05
    mc_scale: float = 1e9
    retire_prob: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.branching or any(b < 2 for b in self.branching):
            raise ValueError(f"branching factors must all be >= 2, got {self.branching}")
        if self.firms_per_block < 1:
            raise ValueError("infeasible config: blocks would be empty")
        if self.members_per_firm < 1:
            raise ValueError("infeasible config: firms would have no members")
        if len(self.level_rates) != len(self.branching) + 1:
            raise ValueError(
                f"need {len(self.branching) + 1} level rates (root..leaf), got {len(self.level_rates)}"
            )
        if any(r < 0 for r in self.level_rates):
            raise ValueError("mixing rates must be non-negative")
        for name in ("industry_alignment", "region_alignment", "monthly_move_prob", "degree_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.end_year < self.start_year:
            raise ValueError("end_year before start_year")
        if self.skills_per_member - 1 > self.n_common_skills:
            raise ValueError("not enough common skills to sample from")
        if self.n_common_skills > len(COMMON_SKILLS):
            raise ValueError(f"at most {len(COMMON_SKILLS)} common skills available")

    @property
    def n_blocks(self) -> int:
        n = 1
        for b in self.branching:
            n *= b
        return n

    @property
    def n_firms(self) -> int:
        return self.n_blocks * self.firms_per_block

    @property
    def window(self) -> tuple[Month, Month]:
        return Month(self.start_year, 1), Month(self.end_year + 1, 1)

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(range(self.start_year, self.end_year + 1))


@dataclass(frozen=True)
class PlantedFirm:
    firm: str
    path: str
    industry: str
    region: str


@dataclass(frozen=True)
class UnitTrend:
    unit: str
    attract_slope: float
    flux_slope: float | None
    mc_slope: float


@dataclass
class SynthData:
    config: SynthConfig
    transitions: list[TransitionRecord]
    spells: list[EmploymentSpell]
    profiles: list[MemberProfile]
    marketcap: dict[str, dict[int, float]]
    roster: list[str]
    planted: dict[str, PlantedFirm]
    unit_trends: list[UnitTrend] = field(default_factory=list)

    def block_assignment(self, level: int | None = None) -> dict:
        """firm -> planted block path truncated to ``level`` components."""
        depth = len(self.config.branching)
        level = depth if level is None else level
        if not 1 <= level <= depth:
            raise ValueError(f"level must lie in 1..{depth}")
        return {
            firm: ".".join(p.path.split(".")[:level]) for firm, p in self.planted.items()
        }

    def planted_tree(self):
        from .hierarchy import CommunityTree

        return CommunityTree.from_paths({f: p.path for f, p in self.planted.items()})

    def degree_holders(self) -> set:
        return {p.member_id for p in self.profiles if p.has_degree}

    def home_members(self) -> dict:
        """firm -> members whose first job was there (one firm per member).

        Employee pooling over all spells couples same-block firms through
        worker mobility; this disjoint mapping is the clean population for
        metadata-alignment oracles.
        """
        first: dict = {}
        for sp in self.spells:
            cur = first.get(sp.member_id)
            if cur is None or sp.start_month < cur.start_month:
                first[sp.member_id] = sp
        out: dict = {firm: [] for firm in self.roster}
        for sp in first.values():
            out[sp.firm].append(sp.member_id)
        return {firm: tuple(sorted(ms)) for firm, ms in out.items()}

    def write(self, outdir) -> dict:
        from . import io

        return io.write_synth_data(self, outdir)


def _block_paths(branching: tuple[int, ...]) -> list[str]:
    return [".".join(map(str, combo)) for combo in product(*(range(b) for b in branching))]


def _common_prefix_len(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def generate(cfg: SynthConfig) -> SynthData:
    """Generate transitions, spells, profiles, and a market-cap panel.

    Destination choice follows the block rates times a per-block
    attractiveness exp(slope * years-from-midpoint), which plants per-block
    flux trends. Market caps are then coupled to each block's *realized*
    flux trend (fit with the same inclusion rules the trends stage uses),
    keeping the configured coupling the true second-stage slope.
    """
    rng = random.Random(cfg.seed)
    block_tuples = list(product(*(range(b) for b in cfg.branching)))
    paths = _block_paths(cfg.branching)
    n_blocks = len(paths)
    prefix_len = [
        [_common_prefix_len(a, b) for b in block_tuples] for a in block_tuples
    ]
    leaf_depth = len(cfg.branching)

    industry_pool = [f"ind{b:02d}" for b in range(n_blocks)]
    region_pool = [f"reg{b:02d}" for b in range(n_blocks)]

    firms: list[str] = []
    block_of_firm: list[int] = []
    planted: dict[str, PlantedFirm] = {}
    for b in range(n_blocks):
        for k in range(cfg.firms_per_block):
            firm = f"F{b * cfg.firms_per_block + k:05d}"
            industry = (
                industry_pool[b]
                if rng.random() < cfg.industry_alignment
                else industry_pool[rng.randrange(n_blocks)]
            )
            region = (
                region_pool[b]
                if rng.random() < cfg.region_alignment
                else region_pool[rng.randrange(n_blocks)]
            )
            firms.append(firm)
            block_of_firm.append(b)
            planted[firm] = PlantedFirm(firm=firm, path=paths[b], industry=industry, region=region)

    attract_slope = [rng.uniform(-cfg.trend_range, cfg.trend_range) for _ in range(n_blocks)]

    m0 = Month(cfg.start_year, 1).index
    m1 = Month(cfg.end_year, 12).index
    tau_mid = (m1 - m0) / 24.0  # years to window midpoint

    firm_index_in_block = [
        list(range(b * cfg.firms_per_block, (b + 1) * cfg.firms_per_block))
        for b in range(n_blocks)
    ]

    def pick_destination(cur: int, month_idx: int) -> int | None:
        cb = block_of_firm[cur]
        tau = (month_idx - m0) / 12.0 - tau_mid
        weights = []
        total = 0.0
        for b in range(n_blocks):
            avail = cfg.firms_per_block - (1 if b == cb else 0)
            w = cfg.level_rates[prefix_len[cb][b]] * avail * math.exp(attract_slope[b] * tau)
            weights.append(w)
            total += w
        if total <= 0.0:
            return None
        r = rng.random() * total
        acc = 0.0
        b = n_blocks - 1
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                b = i
                break
        candidates = firm_index_in_block[b]
        pick = rng.randrange(len(candidates) - (1 if b == cb else 0))
        dest = candidates[pick]
        if b == cb and dest >= cur:
            dest = candidates[pick + 1]
        return dest

    transitions: list[TransitionRecord] = []
    spells: list[EmploymentSpell] = []
    profiles: list[MemberProfile] = []
    common_pool = list(COMMON_SKILLS[: cfg.n_common_skills])

    member_no = 0
    for home in range(cfg.n_firms):
        for _ in range(cfg.members_per_firm):
            member = f"M{member_no:06d}"
            member_no += 1
            start = m0 + rng.randrange(12)
            history: list[tuple[int, int, int | None]] = [(home, start, None)]
            cur = home
            for month_idx in range(start + 1, m1 + 1):
                if rng.random() >= cfg.monthly_move_prob:
                    continue
                dest = pick_destination(cur, month_idx)
                if dest is None or dest == cur:
                    continue
                transitions.append(
                    TransitionRecord(
                        member_id=member,
                        from_firm=firms[cur],
                        to_firm=firms[dest],
                        start_month=Month.from_index(month_idx),
                    )
                )
                prev_firm, prev_start, _ = history[-1]
                history[-1] = (prev_firm, prev_start, month_idx - 1)
                history.append((dest, month_idx, None))
                cur = dest
            if rng.random() < cfg.retire_prob:
                last_firm, last_start, _ = history[-1]
                history[-1] = (last_firm, last_start, rng.randrange(last_start, m1 + 1))
            for firm_idx, sp_start, sp_end in history:
                spells.append(
                    EmploymentSpell(
                        member_id=member,
                        firm=firms[firm_idx],
                        start_month=Month.from_index(sp_start),
                        end_month=None if sp_end is None else Month.from_index(sp_end),
                    )
                )
            home_info = planted[firms[home]]
            skills = sorted(
                {f"specialty {home_info.path}"}
                | set(rng.sample(common_pool, cfg.skills_per_member - 1))
            )
            profiles.append(
                MemberProfile(
                    member_id=member,
                    region=home_info.region,
                    industry=home_info.industry,
                    degree="college" if rng.random() < cfg.degree_prob else "",
                    skills=tuple(skills),
                )
            )

    data = SynthData(
        config=cfg,
        transitions=transitions,
        spells=spells,
        profiles=profiles,
        marketcap={},
        roster=list(firms),
        planted=planted,
    )

    # Realized per-block flux trends, fit exactly the way the trends stage fits them.
    unit_of = {firm: p.path for firm, p in planted.items()}
    series, _ = flux_series(
        data.transitions,
        data.spells,
        unit_of,
        cfg.years,
        members=data.degree_holders(),
    )
    realized: dict[str, float | None] = {}
    for path in paths:
        s = series.get(path)
        if s is None:
            realized[path] = None
            continue
        try:
            realized[path] = ols_trend(zip(s.years, s.log_ratio())).slope
        except ValueError:
            realized[path] = None

    marketcap: dict[str, dict[int, float]] = {}
    unit_trends: list[UnitTrend] = []
    for b, path in enumerate(paths):
        flux_slope = realized[path]
        if cfg.mc_coupling is not None and flux_slope is not None:
            mc_slope = cfg.mc_coupling * flux_slope
        else:
            mc_slope = rng.uniform(-0.1, 0.1)
        base = math.log(cfg.mc_scale * cfg.firms_per_block * rng.uniform(0.5, 2.0))
        shares = [rng.uniform(0.5, 1.5) for _ in range(cfg.firms_per_block)]
        share_total = sum(shares)
        yearly_total = {
            year: math.exp(
                base + mc_slope * (year - cfg.start_year) + rng.gauss(0.0, cfg.mc_noise_sd)
            )
            for year in cfg.years
        }
        for k, firm_idx in enumerate(firm_index_in_block[b]):
            firm = firms[firm_idx]
            marketcap[firm] = {
                year: yearly_total[year] * shares[k] / share_total for year in cfg.years
            }
        unit_trends.append(
            UnitTrend(unit=path, attract_slope=attract_slope[b], flux_slope=flux_slope, mc_slope=mc_slope)
        )

    data.marketcap = marketcap
    data.unit_trends = unit_trends
    return data


def hierarchical_benchmark(seed: int = 0, **overrides) -> SynthConfig:
    """The standard 4x3 planted benchmark (25 firms per sub-block).

    The super level concentrates flow 10:1 over the background; sub-blocks
    concentrate a further 6:1 so the recursion can resolve them.
    """
    return replace(SynthConfig(seed=seed), **overrides)
