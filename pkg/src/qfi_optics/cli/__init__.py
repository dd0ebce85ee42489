"""Command line: subcommand registry, sweeps, artifacts and plots."""

from qfi_optics.cli.artifacts import (
    ArtifactMeta,
    build_meta,
    canonical_json,
    load_state,
    read_csv,
    read_json,
    save_state,
    write_csv,
    write_json,
)
from qfi_optics.cli.commands import register_all_commands
from qfi_optics.cli.plotting import plot_sweep
from qfi_optics.cli.registry import CommandRegistry, get_command_registry
from qfi_optics.cli.sweep import SweepResult, parse_grid, run_sweep, sweep_columns

__all__ = [
    "ArtifactMeta",
    "CommandRegistry",
    "SweepResult",
    "build_meta",
    "canonical_json",
    "get_command_registry",
    "load_state",
    "parse_grid",
    "plot_sweep",
    "read_csv",
    "read_json",
    "register_all_commands",
    "run_sweep",
    "save_state",
    "sweep_columns",
    "write_csv",
    "write_json",
]
