"""CSV/JSON readers and writers for every pipeline artifact.

All outputs are UTF-8 with LF line endings and fixed float formats, so a
rerun with identical inputs and parameters is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from .features import LevelDiagnostics, NullLevelStats
from .flows import FluxMatrix
from .hierarchy import CommunityTree, TreeNode
from .network import LaborFlowNetwork
from .records import (
    EmploymentSpell,
    IngestReport,
    MemberProfile,
    Month,
    TransitionRecord,
)
from .trends import QuartileSkillReport, TrendRegression

WEIGHT_FMT = "%.9f"


class SchemaError(ValueError):
    """A file's structure (header, columns, JSON shape) is not as documented."""


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _reader(path, expected_header: list[str]):
    f = open(path, newline="", encoding="utf-8")
    rows = csv.reader(f)
    try:
        header = next(rows)
    except StopIteration:
        f.close()
        raise SchemaError(f"{path}: empty file, expected header {expected_header}")
    if header != expected_header:
        f.close()
        raise SchemaError(f"{path}: header {header} != expected {expected_header}")
    return f, rows


def _writer(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    f = open(path, "w", newline="", encoding="utf-8")
    return f, csv.writer(f, lineterminator="\n")


# -- transition / spell / profile / market-cap inputs ------------------------

TRANSITIONS_HEADER = ["member_id", "from_firm", "to_firm", "start_month"]


def load_transitions(path) -> tuple[list[TransitionRecord], IngestReport]:
    report = IngestReport(source=str(path))
    records: list[TransitionRecord] = []
    f, rows = _reader(path, TRANSITIONS_HEADER)
    with f:
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 4:
                report.reject(line_no, f"expected 4 columns, got {len(row)}")
                continue
            member, from_firm, to_firm, month_text = row
            try:
                month = Month.parse(month_text)
            except ValueError as exc:
                report.reject(line_no, str(exc))
                continue
            records.append(TransitionRecord(member, from_firm, to_firm, month))
            report.accepted += 1
    return records, report


def write_transitions(records, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(TRANSITIONS_HEADER)
        for r in records:
            w.writerow([r.member_id, r.from_firm, r.to_firm, str(r.start_month)])


SPELLS_HEADER = ["member_id", "firm", "start_month", "end_month"]


def load_spells(path) -> tuple[list[EmploymentSpell], IngestReport]:
    report = IngestReport(source=str(path))
    spells: list[EmploymentSpell] = []
    f, rows = _reader(path, SPELLS_HEADER)
    with f:
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 4:
                report.reject(line_no, f"expected 4 columns, got {len(row)}")
                continue
            member, firm, start_text, end_text = row
            try:
                start = Month.parse(start_text)
                end = Month.parse(end_text) if end_text.strip() else None
                spells.append(EmploymentSpell(member, firm, start, end))
            except ValueError as exc:
                report.reject(line_no, str(exc))
                continue
            report.accepted += 1
    return spells, report


def write_spells(spells, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(SPELLS_HEADER)
        for s in spells:
            w.writerow(
                [s.member_id, s.firm, str(s.start_month), "" if s.end_month is None else str(s.end_month)]
            )


PROFILES_HEADER = ["member_id", "region", "industry", "degree", "skills"]


def load_profiles(path) -> tuple[list[MemberProfile], IngestReport]:
    report = IngestReport(source=str(path))
    profiles: list[MemberProfile] = []
    f, rows = _reader(path, PROFILES_HEADER)
    with f:
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 5:
                report.reject(line_no, f"expected 5 columns, got {len(row)}")
                continue
            member, region, industry, degree, skills_text = row
            skills = tuple(s for s in (t.strip() for t in skills_text.split(";")) if s)
            profiles.append(MemberProfile(member, region, industry, degree, skills))
            report.accepted += 1
    return profiles, report


def write_profiles(profiles, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(PROFILES_HEADER)
        for p in profiles:
            w.writerow([p.member_id, p.region, p.industry, p.degree, ";".join(p.skills)])


MARKETCAP_HEADER = ["firm", "year", "q4_marketcap"]


def load_marketcap(path) -> tuple[dict, IngestReport]:
    report = IngestReport(source=str(path))
    panel: dict = {}
    f, rows = _reader(path, MARKETCAP_HEADER)
    with f:
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 3:
                report.reject(line_no, f"expected 3 columns, got {len(row)}")
                continue
            firm, year_text, value_text = row
            try:
                year = int(year_text)
                value = float(value_text)
                if not math.isfinite(value) or value < 0:
                    raise ValueError(f"bad market cap {value_text!r}")
            except ValueError as exc:
                report.reject(line_no, str(exc))
                continue
            panel.setdefault(firm, {})[year] = value
            report.accepted += 1
    return panel, report


def write_marketcap(panel, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(MARKETCAP_HEADER)
        for firm in sorted(panel):
            for year in sorted(panel[firm]):
                w.writerow([firm, year, "%.4f" % panel[firm][year]])


ROSTER_HEADER = ["firm"]


def load_roster(path) -> list[str]:
    f, rows = _reader(path, ROSTER_HEADER)
    with f:
        return [row[0] for row in rows if row]


def write_roster(firms, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(ROSTER_HEADER)
        for firm in firms:
            w.writerow([firm])


# -- network dump -------------------------------------------------------------

NETWORK_HEADER = ["from", "to", "weight"]


def _meta_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def dump_network(net: LaborFlowNetwork, path) -> None:
    """Edge list CSV (weights at 9 decimals) plus a window sidecar."""
    f, w = _writer(path)
    with f:
        w.writerow(NETWORK_HEADER)
        for (a, b), weight in net.sorted_edges():
            w.writerow([a, b, WEIGHT_FMT % weight])
    meta = {
        "window_start": str(net.window[0]),
        "window_end": str(net.window[1]),
        "n_firms": net.n_firms,
        "n_edges": net.n_edges,
    }
    _meta_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def load_network(path, window: tuple[Month, Month] | None = None) -> LaborFlowNetwork:
    if window is None:
        meta_file = _meta_path(path)
        if not meta_file.exists():
            raise SchemaError(f"{path}: no window sidecar {meta_file.name}; pass window explicitly")
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
        window = (Month.parse(meta["window_start"]), Month.parse(meta["window_end"]))
    edges: dict = {}
    firms: set = set()
    f, rows = _reader(path, NETWORK_HEADER)
    with f:
        for line_no, row in enumerate(rows, start=2):
            if len(row) != 3:
                raise SchemaError(f"{path}:{line_no}: expected 3 columns")
            a, b, weight_text = row
            edges[(a, b)] = float(weight_text)
            firms.update((a, b))
    return LaborFlowNetwork(firms=frozenset(firms), edges=edges, window=window)


# -- community tree -----------------------------------------------------------


def save_tree(tree: CommunityTree, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(tree.root.as_dict(), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_tree(path) -> CommunityTree:
    try:
        root = TreeNode.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not a community tree JSON file ({exc})")
    return CommunityTree(root)


def write_tree_flat(tree: CommunityTree, path) -> None:
    """firm -> dot-joined path of its deepest community."""
    f, w = _writer(path)
    with f:
        w.writerow(["firm", "path"])
        paths = tree.leaf_paths()
        for firm in sorted(paths, key=str):
            w.writerow([firm, paths[firm]])


# -- diagnostics --------------------------------------------------------------

DIAGNOSTICS_HEADER = ["level", "rho", "d_ind", "d_reg", "se_ind", "se_reg", "delta_ind", "delta_reg"]


def write_diagnostics(rows: list[LevelDiagnostics], path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(DIAGNOSTICS_HEADER)
        for r in rows:
            w.writerow(
                [
                    r.level,
                    WEIGHT_FMT % r.rho,
                    WEIGHT_FMT % r.mean_reduction_industry,
                    WEIGHT_FMT % r.mean_reduction_region,
                    WEIGHT_FMT % r.se_industry,
                    WEIGHT_FMT % r.se_region,
                    "" if r.delta_industry is None else WEIGHT_FMT % r.delta_industry,
                    "" if r.delta_region is None else WEIGHT_FMT % r.delta_region,
                ]
            )


def write_null_stats(stats: list[NullLevelStats], path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["level", "n_rep", "null_mean_ind", "null_sd_ind", "null_mean_reg", "null_sd_reg"])
        for s in stats:
            w.writerow(
                [
                    s.level,
                    s.n_rep,
                    WEIGHT_FMT % s.mean_industry,
                    WEIGHT_FMT % s.sd_industry,
                    WEIGHT_FMT % s.mean_region,
                    WEIGHT_FMT % s.sd_region,
                ]
            )


# -- over-representation ------------------------------------------------------


def write_scores(scores_by_node: dict, path) -> None:
    """All label scores, one row per (cluster, label type, label), by z descending."""
    rows = []
    for node_id, by_attr in scores_by_node.items():
        for attr, scores in by_attr.items():
            for s in scores:
                rows.append((node_id, attr, s.label, s.delta, s.variance, s.z))
    rows.sort(key=lambda r: (-r[5], r[0], r[1], r[2]))
    f, w = _writer(path)
    with f:
        w.writerow(["cluster_id", "label_type", "label", "delta", "variance", "z"])
        for node_id, attr, label, delta, var, z in rows:
            w.writerow([node_id, attr, label, WEIGHT_FMT % delta, WEIGHT_FMT % var, WEIGHT_FMT % z])


def write_save_list(node_ids: list[str], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(list(node_ids), indent=2) + "\n", encoding="utf-8")


def load_save_list(path) -> list[str]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise SchemaError(f"{path}: expected a JSON array of cluster ids")
    return [str(x) for x in data]


# -- flux matrices ------------------------------------------------------------


def write_flux_matrix(fm: FluxMatrix, base_path) -> dict:
    """Raw and normalized matrices plus marginals; undefined cells stay empty."""
    base = Path(base_path)
    raw_path = base.with_name(base.name + "_raw.csv")
    norm_path = base.with_name(base.name + "_normalized.csv")
    marg_path = base.with_name(base.name + "_marginals.csv")

    labels = [str(g) for g in fm.groups]
    f, w = _writer(raw_path)
    with f:
        w.writerow(["group"] + labels)
        for i, g in enumerate(labels):
            w.writerow([g] + [WEIGHT_FMT % x for x in fm.raw[i]])
    f, w = _writer(norm_path)
    with f:
        w.writerow(["group"] + labels)
        for i, g in enumerate(labels):
            w.writerow(
                [g]
                + [
                    WEIGHT_FMT % fm.normalized[i, j] if fm.defined[i, j] else ""
                    for j in range(len(labels))
                ]
            )
    f, w = _writer(marg_path)
    with f:
        w.writerow(["group", "s_out", "s_in"])
        for i, g in enumerate(labels):
            w.writerow([g, WEIGHT_FMT % fm.s_out[i], WEIGHT_FMT % fm.s_in[i]])
    return {"raw": raw_path, "normalized": norm_path, "marginals": marg_path}


# -- trends -------------------------------------------------------------------

TREND_HEADER = ["unit", "beta_lf", "beta_mc", "se_lf", "se_mc"]


def write_trend_rows(reg: TrendRegression, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(TREND_HEADER)
        for r in reg.rows:
            w.writerow(
                [
                    r.unit,
                    WEIGHT_FMT % r.beta_flux,
                    WEIGHT_FMT % r.beta_marketcap,
                    WEIGHT_FMT % r.se_flux,
                    WEIGHT_FMT % r.se_marketcap,
                ]
            )


def write_trend_summary(reg: TrendRegression, path) -> None:
    summary = {
        "beta": reg.beta,
        "intercept": reg.intercept,
        "beta_se": reg.beta_se,
        "correlation": reg.correlation,
        "n_units": len(reg.rows),
        "dropped": [{"unit": u, "reason": r} for u, r in reg.dropped],
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def write_skill_report(report: QuartileSkillReport, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["skill", "p_top", "p_bottom", "z"])
        for r in report.rows:
            w.writerow([r.skill, WEIGHT_FMT % r.p_top, WEIGHT_FMT % r.p_bottom, WEIGHT_FMT % r.z])


def write_ingest_report(reports: list[IngestReport], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    payload = [r.as_dict() for r in reports]
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# -- synth bundle -------------------------------------------------------------


def write_planted(planted: dict, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["firm", "true_path", "true_industry", "true_region"])
        for firm in sorted(planted):
            p = planted[firm]
            w.writerow([p.firm, p.path, p.industry, p.region])


def write_unit_trends(unit_trends, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["unit", "attract_slope", "flux_slope", "mc_slope"])
        for t in unit_trends:
            w.writerow(
                [
                    t.unit,
                    WEIGHT_FMT % t.attract_slope,
                    "" if t.flux_slope is None else WEIGHT_FMT % t.flux_slope,
                    WEIGHT_FMT % t.mc_slope,
                ]
            )


def write_synth_data(data, outdir) -> dict:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {
        "transitions": outdir / "transitions.csv",
        "spells": outdir / "spells.csv",
        "profiles": outdir / "profiles.csv",
        "marketcap": outdir / "marketcap.csv",
        "roster": outdir / "roster.csv",
        "planted_labels": outdir / "planted_labels.csv",
        "planted_trends": outdir / "planted_trends.csv",
    }
    write_transitions(data.transitions, paths["transitions"])
    write_spells(data.spells, paths["spells"])
    write_profiles(data.profiles, paths["profiles"])
    write_marketcap(data.marketcap, paths["marketcap"])
    write_roster(data.roster, paths["roster"])
    write_planted(data.planted, paths["planted_labels"])
    write_unit_trends(data.unit_trends, paths["planted_trends"])
    return paths
