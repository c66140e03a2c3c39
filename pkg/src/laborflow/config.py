"""Flat key=value pipeline configuration with typed parsing and overrides."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .io import SchemaError


@dataclass
class PipelineConfig:
    """Every run-time knob of the batch pipeline, with sensible analysis defaults."""

    transitions: str = ""
    spells: str = ""
    profiles: str = ""
    marketcap: str = ""
    roster: str = ""
    out_dir: str = "out"
    window_start: str = "2010-01"
    window_end: str = "2015-01"
    min_weight: float = 2.0
    core_k: int = 2
    min_size: int = 10
    theta_keep: float = 1.96
    theta_break: float = 100.0
    prior_strength: float = 0.0  # 0 means the default 1% of the background total
    seed: int = 0
    null_replicates: int = 100
    groupings: tuple[str, ...] = ("industry", "region", "cluster")
    detect_on: str = "core"
    flux_on: str = "full"
    mc_window: tuple[int, int] = (2011, 2014)
    flux_window: tuple[int, int] = (2010, 2014)
    require_degree: bool = True
    include_first_jobs: bool = True
    include_last_jobs: bool = True
    unit_mode: str = "employees"
    threads: int = 1
    # synth stage
    synth_branching: tuple[int, ...] = (2, 2)
    synth_firms_per_block: int = 8
    synth_members_per_firm: int = 8
    synth_level_rates: tuple[float, ...] = (1.0, 10.0, 60.0)
    synth_industry_alignment: float = 0.9
    synth_region_alignment: float = 0.9
    synth_move_prob: float = 0.05
    synth_degree_prob: float = 0.8
    synth_trend_range: float = 0.4
    synth_mc_coupling: float = 0.5
    synth_mc_noise_sd: float = 0.05
    synth_retire_prob: float = 0.05
    synth_start_year: int = 2010
    synth_end_year: int = 2014

    def as_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def validate(self) -> None:
        checks = [
            (self.min_weight >= 0, "min_weight must be non-negative"),
            (self.core_k >= 1, "core_k must be >= 1"),
            (self.min_size >= 1, "min_size must be >= 1"),
            (self.theta_keep > 0, "theta_keep must be positive"),
            (self.theta_break > 0, "theta_break must be positive"),
            (self.prior_strength >= 0, "prior_strength must be non-negative"),
            (self.null_replicates >= 1, "null_replicates must be >= 1"),
            (self.threads >= 1, "threads must be >= 1"),
            (self.detect_on in ("core", "full"), "detect_on must be 'core' or 'full'"),
            (self.flux_on in ("core", "full"), "flux_on must be 'core' or 'full'"),
            (self.unit_mode in ("employees", "firms"), "unit_mode must be 'employees' or 'firms'"),
            (
                all(g in ("industry", "region", "cluster") for g in self.groupings),
                "groupings must be among industry, region, cluster",
            ),
        ]
        for ok, message in checks:
            if not ok:
                raise SchemaError(f"config: {message}")


_BOOL_TEXT = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_TEXT[text.strip().lower()]
    except KeyError:
        raise SchemaError(f"not a boolean: {text!r}")


def _parse_year_range(text: str) -> tuple[int, int]:
    sep = "-" if "-" in text else ","
    parts = [p.strip() for p in text.split(sep)]
    if len(parts) != 2:
        raise SchemaError(f"expected a year range like 2011-2014: {text!r}")
    return int(parts[0]), int(parts[1])


def _parse_value(name: str, text: str, example):
    text = text.strip()
    if name in ("mc_window", "flux_window"):
        return _parse_year_range(text)
    if isinstance(example, bool):
        return _parse_bool(text)
    if isinstance(example, int):
        return int(text)
    if isinstance(example, float):
        return float(text)
    if isinstance(example, tuple):
        items = [p.strip() for p in text.split(",") if p.strip()]
        if example and isinstance(example[0], int):
            return tuple(int(p) for p in items)
        if example and isinstance(example[0], float):
            return tuple(float(p) for p in items)
        return tuple(items)
    return text


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse ``key = value`` lines; '#' starts a comment; unknown keys fail."""
    cfg = base or PipelineConfig()
    defaults = {f.name: getattr(cfg, f.name) for f in fields(PipelineConfig)}
    values = dict(defaults)
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"config line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in defaults:
            raise SchemaError(f"config line {line_no}: unknown key {key!r}")
        try:
            values[key] = _parse_value(key, value, defaults[key])
        except (ValueError, SchemaError) as exc:
            raise SchemaError(f"config line {line_no}: bad value for {key!r}: {exc}")
    return PipelineConfig(**values)


def load_config(path, overrides: list[str] | None = None) -> PipelineConfig:
    """Read a config file (optional) and apply ``key=value`` overrides on top."""
    cfg = PipelineConfig()
    if path:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file not found: {p}")
        cfg = parse_config_text(p.read_text(encoding="utf-8"))
    if overrides:
        cfg = parse_config_text("\n".join(overrides), base=cfg)
    cfg.validate()
    return cfg
