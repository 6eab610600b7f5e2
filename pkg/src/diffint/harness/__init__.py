"""Run configuration, sweeps, comparison reports and the CLI."""
from .compare import McComparison, compare_mc
from .config import RunConfig, load_config, parse_config_text, preset_overrides
from .sweep import SweepRow, SweepSpec, emit_csv, emit_svg, run_sweep, write_csv

__all__ = [
    "McComparison",
    "RunConfig",
    "SweepRow",
    "SweepSpec",
    "compare_mc",
    "emit_csv",
    "emit_svg",
    "load_config",
    "parse_config_text",
    "preset_overrides",
    "run_sweep",
    "write_csv",
]
