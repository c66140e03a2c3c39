"""Batch pipeline front end: synth | build | detect | diagnose | overrep | prune | flux | trends | all."""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import defaultdict
from pathlib import Path

from . import __version__, io
from .config import PipelineConfig, load_config
from .features import canonical_firm_label, firm_label_counts, hierarchy_diagnostics
from .flows import aggregate_flux, normalize_flux
from .hierarchy import detect_hierarchy
from .io import SchemaError
from .network import EmptyCoreError, build_network, extract_core
from .overrep import PruneConfig, prune_tree, score_tree
from .records import Month
from .synth import SynthConfig, generate
from .trends import flux_series, ols_trend, quartile_skills, trend_regression

CONFIG_ENV = "LABORFLOW_CONFIG"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING_INPUT = 2
EXIT_SCHEMA = 3
EXIT_EMPTY_CORE = 4

STAGES = ["synth", "build", "detect", "overrep", "prune", "diagnose", "flux", "trends"]


class StageError(RuntimeError):
    def __init__(self, code: int, stage: str, message: str):
        super().__init__(message)
        self.code = code
        self.stage = stage


def _require_file(path: str, what: str, stage: str) -> Path:
    if not path:
        raise StageError(EXIT_MISSING_INPUT, stage, f"no {what} path configured")
    p = Path(path)
    if not p.exists():
        raise StageError(EXIT_MISSING_INPUT, stage, f"{what} file not found: {p}")
    return p


def _write_manifest(cfg: PipelineConfig, stage: str, inputs: dict, outputs: list) -> Path:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "stage": stage,
        "version": __version__,
        "seed": cfg.seed,
        "parameters": cfg.as_dict(),
        "inputs": {
            name: {"file": Path(p).name, "sha256": io.sha256_file(p)}
            for name, p in sorted(inputs.items())
        },
        "outputs": {
            Path(p).name: io.sha256_file(p) for p in sorted(outputs, key=lambda x: Path(x).name)
        },
    }
    path = out_dir / f"manifest_{stage}.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def _out(cfg: PipelineConfig, name: str) -> Path:
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


def stage_synth(cfg: PipelineConfig) -> None:
    scfg = SynthConfig(
        branching=cfg.synth_branching,
        firms_per_block=cfg.synth_firms_per_block,
        members_per_firm=cfg.synth_members_per_firm,
        level_rates=cfg.synth_level_rates,
        industry_alignment=cfg.synth_industry_alignment,
        region_alignment=cfg.synth_region_alignment,
        start_year=cfg.synth_start_year,
        end_year=cfg.synth_end_year,
        monthly_move_prob=cfg.synth_move_prob,
        degree_prob=cfg.synth_degree_prob,
        trend_range=cfg.synth_trend_range,
        mc_coupling=cfg.synth_mc_coupling,
        mc_noise_sd=cfg.synth_mc_noise_sd,
        retire_prob=cfg.synth_retire_prob,
        seed=cfg.seed,
    )
    data = generate(scfg)
    paths = data.write(cfg.out_dir)
    _write_manifest(cfg, "synth", {}, list(paths.values()))


def stage_build(cfg: PipelineConfig) -> None:
    transitions_path = _require_file(cfg.transitions, "transitions", "build")
    records, report = io.load_transitions(transitions_path)
    window = (Month.parse(cfg.window_start), Month.parse(cfg.window_end))
    net = build_network(records, window)
    full_path = _out(cfg, "network_full.csv")
    io.dump_network(net, full_path)
    core = extract_core(net, min_weight=cfg.min_weight, core_k=cfg.core_k)
    core_path = _out(cfg, "network_core.csv")
    io.dump_network(core, core_path)
    report_path = _out(cfg, "ingest_report.json")
    io.write_ingest_report([report], report_path)
    _write_manifest(
        cfg,
        "build",
        {"transitions": transitions_path},
        [full_path, core_path, report_path],
    )


def _network_for(cfg: PipelineConfig, which: str, stage: str):
    name = "network_core.csv" if which == "core" else "network_full.csv"
    path = _require_file(str(Path(cfg.out_dir) / name), name, stage)
    return path, io.load_network(path)


def stage_detect(cfg: PipelineConfig) -> None:
    net_path, net = _network_for(cfg, cfg.detect_on, "detect")
    tree = detect_hierarchy(net, min_size=cfg.min_size, seed=cfg.seed)
    tree_path = _out(cfg, "tree.json")
    io.save_tree(tree, tree_path)
    flat_path = _out(cfg, "tree_flat.csv")
    io.write_tree_flat(tree, flat_path)
    _write_manifest(cfg, "detect", {"network": net_path}, [tree_path, flat_path])


def _label_tables(cfg: PipelineConfig, stage: str):
    spells_path = _require_file(cfg.spells, "spells", stage)
    profiles_path = _require_file(cfg.profiles, "profiles", stage)
    spells, _ = io.load_spells(spells_path)
    profiles, _ = io.load_profiles(profiles_path)
    firm_members: dict = defaultdict(set)
    for sp in spells:
        firm_members[sp.firm].add(sp.member_id)
    industry = firm_label_counts(firm_members, {p.member_id: p.industry for p in profiles})
    region = firm_label_counts(firm_members, {p.member_id: p.region for p in profiles})
    return spells_path, profiles_path, spells, profiles, industry, region


def stage_overrep(cfg: PipelineConfig) -> None:
    tree_path = _require_file(str(Path(cfg.out_dir) / "tree.json"), "tree.json", "overrep")
    tree = io.load_tree(tree_path)
    spells_path, profiles_path, _, _, industry, region = _label_tables(cfg, "overrep")
    prior = cfg.prior_strength if cfg.prior_strength > 0 else None
    scores = score_tree(tree, industry, region, prior_strength=prior)
    scored_path = _out(cfg, "tree_scored.json")
    io.save_tree(tree, scored_path)
    scores_path = _out(cfg, "scores.csv")
    io.write_scores(scores, scores_path)
    _write_manifest(
        cfg,
        "overrep",
        {"tree": tree_path, "spells": spells_path, "profiles": profiles_path},
        [scored_path, scores_path],
    )


def stage_prune(cfg: PipelineConfig) -> None:
    scored_path = _require_file(str(Path(cfg.out_dir) / "tree_scored.json"), "tree_scored.json", "prune")
    tree = io.load_tree(scored_path)
    save_list = prune_tree(tree, PruneConfig(theta_keep=cfg.theta_keep, theta_break=cfg.theta_break))
    save_path = _out(cfg, "save_list.json")
    io.write_save_list(save_list, save_path)
    _write_manifest(cfg, "prune", {"tree_scored": scored_path}, [save_path])


def stage_diagnose(cfg: PipelineConfig) -> None:
    tree_path = _require_file(str(Path(cfg.out_dir) / "tree.json"), "tree.json", "diagnose")
    tree = io.load_tree(tree_path)
    spells_path, profiles_path, _, _, industry, region = _label_tables(cfg, "diagnose")
    diags, nulls = hierarchy_diagnostics(
        tree,
        industry,
        region,
        seed=cfg.seed,
        n_rep=cfg.null_replicates,
        unit=cfg.unit_mode,
        threads=cfg.threads,
    )
    diag_path = _out(cfg, "diagnostics.csv")
    io.write_diagnostics(diags, diag_path)
    null_path = _out(cfg, "diagnostics_null.csv")
    io.write_null_stats(nulls, null_path)
    _write_manifest(
        cfg,
        "diagnose",
        {"tree": tree_path, "spells": spells_path, "profiles": profiles_path},
        [diag_path, null_path],
    )


def _cluster_map(cfg: PipelineConfig, stage: str) -> dict:
    scored_path = _require_file(str(Path(cfg.out_dir) / "tree_scored.json"), "tree_scored.json", stage)
    save_path = _require_file(str(Path(cfg.out_dir) / "save_list.json"), "save_list.json", stage)
    tree = io.load_tree(scored_path)
    saved = set(io.load_save_list(save_path))
    mapping: dict = {}
    for node in tree.nodes():
        if node.id in saved:
            for f in node.firms:
                mapping[f] = node.id
    return mapping


def _grouping_map(cfg: PipelineConfig, grouping: str, industry, region, stage: str) -> dict:
    if grouping == "industry":
        return {f: canonical_firm_label(c) for f, c in industry.items()}
    if grouping == "region":
        return {f: canonical_firm_label(c) for f, c in region.items()}
    if grouping == "cluster":
        return _cluster_map(cfg, stage)
    raise StageError(EXIT_SCHEMA, stage, f"unknown grouping {grouping!r}")


def stage_flux(cfg: PipelineConfig) -> None:
    net_path, net = _network_for(cfg, cfg.flux_on, "flux")
    _, _, _, _, industry, region = _label_tables(cfg, "flux")
    outputs = []
    inputs = {"network": net_path}
    for grouping in cfg.groupings:
        group_of = _grouping_map(cfg, grouping, industry, region, "flux")
        raw = aggregate_flux(net, group_of, include_within=True)
        fm = normalize_flux(raw)
        written = io.write_flux_matrix(fm, Path(cfg.out_dir) / f"flux_{grouping}")
        outputs.extend(written.values())
    _write_manifest(cfg, "flux", inputs, outputs)


def stage_trends(cfg: PipelineConfig) -> None:
    transitions_path = _require_file(cfg.transitions, "transitions", "trends")
    marketcap_path = _require_file(cfg.marketcap, "marketcap", "trends")
    transitions, _ = io.load_transitions(transitions_path)
    marketcap, _ = io.load_marketcap(marketcap_path)
    spells_path, profiles_path, spells, profiles, industry, region = _label_tables(cfg, "trends")
    roster = None
    inputs = {
        "transitions": transitions_path,
        "marketcap": marketcap_path,
        "spells": spells_path,
        "profiles": profiles_path,
    }
    if cfg.roster:
        roster_path = _require_file(cfg.roster, "roster", "trends")
        roster = set(io.load_roster(roster_path))
        inputs["roster"] = roster_path

    members = {p.member_id for p in profiles if p.has_degree} if cfg.require_degree else None
    years = range(cfg.flux_window[0], cfg.flux_window[1] + 1)
    firm_members: dict = defaultdict(set)
    for sp in spells:
        firm_members[sp.firm].add(sp.member_id)
    member_skills = {p.member_id: p.skills for p in profiles}

    outputs = []
    for grouping in cfg.groupings:
        unit_of = _grouping_map(cfg, grouping, industry, region, "trends")
        if roster is not None:
            unit_of = {f: u for f, u in unit_of.items() if f in roster}
        series, _inactive = flux_series(
            transitions,
            spells,
            unit_of,
            years,
            members=members,
            include_first_jobs=cfg.include_first_jobs,
            include_last_jobs=cfg.include_last_jobs,
        )
        reg = trend_regression(
            series, marketcap, unit_of, mc_window=cfg.mc_window, flux_window=cfg.flux_window
        )
        rows_path = _out(cfg, f"trend_{grouping}.csv")
        io.write_trend_rows(reg, rows_path)
        summary_path = _out(cfg, f"trend_summary_{grouping}.json")
        io.write_trend_summary(reg, summary_path)
        outputs.extend([rows_path, summary_path])

        members_by_unit: dict = defaultdict(set)
        for firm, unit in unit_of.items():
            if unit is not None:
                members_by_unit[unit].update(firm_members.get(firm, ()))
        for metric_name in ("total", "trend"):
            metric = {}
            for unit, s in series.items():
                if metric_name == "total":
                    value = s.total_log_ratio()
                else:
                    try:
                        value = ols_trend(zip(s.years, s.log_ratio())).slope
                    except ValueError:
                        value = None
                if value is not None:
                    metric[unit] = value
            skills_path = _out(cfg, f"skills_{grouping}_{metric_name}.csv")
            if len(metric) >= 4:
                report = quartile_skills(metric, members_by_unit, member_skills)
                io.write_skill_report(report, skills_path)
            else:  # too few units for quartiles; keep the artifact present but empty
                skills_path.write_text("skill,p_top,p_bottom,z\n", encoding="utf-8")
            outputs.append(skills_path)
    _write_manifest(cfg, "trends", inputs, outputs)


_STAGE_FUNCS = {
    "synth": stage_synth,
    "build": stage_build,
    "detect": stage_detect,
    "overrep": stage_overrep,
    "prune": stage_prune,
    "diagnose": stage_diagnose,
    "flux": stage_flux,
    "trends": stage_trends,
}

ALL_ORDER = ["build", "detect", "overrep", "prune", "diagnose", "flux", "trends"]


def _fail(code: int, stage: str, message: str) -> int:
    print(json.dumps({"error": code, "stage": stage, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="laborflow",
        description="Labor-flow network pipeline: build, cluster, score, prune, and regress.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES + ["all"]:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage in order")
        p.add_argument("--config", default=os.environ.get(CONFIG_ENV), help="config file (key = value lines)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out-dir", default=None, help="override out_dir")
        p.add_argument("--seed", type=int, default=None, help="override seed")
        p.add_argument("--threads", type=int, default=None, help="override threads")
    args = parser.parse_args(argv)

    stage = args.command
    try:
        overrides = list(args.set)
        if args.out_dir is not None:
            overrides.append(f"out_dir = {args.out_dir}")
        if args.seed is not None:
            overrides.append(f"seed = {args.seed}")
        if args.threads is not None:
            overrides.append(f"threads = {args.threads}")
        cfg = load_config(args.config, overrides)
        if stage == "all":
            for stage in ALL_ORDER:
                _STAGE_FUNCS[stage](cfg)
        else:
            _STAGE_FUNCS[stage](cfg)
        return EXIT_OK
    except StageError as exc:
        return _fail(exc.code, exc.stage, str(exc))
    except FileNotFoundError as exc:
        return _fail(EXIT_MISSING_INPUT, stage, str(exc))
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, stage, str(exc))
    except EmptyCoreError as exc:
        return _fail(EXIT_EMPTY_CORE, stage, str(exc))
    except (ValueError, KeyError) as exc:
        return _fail(EXIT_ERROR, stage, f"{type(exc).__name__}: {exc}")


def console_main() -> None:
    sys.exit(main())
