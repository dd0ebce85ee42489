"""Handlers of the ``qfi-optics`` subcommands."""

import argparse
import logging
from pathlib import Path

from pydantic import ValidationError

from qfi_optics.cli.artifacts import (
    build_meta,
    load_state,
    read_json,
    save_state,
    write_csv,
    write_json,
)
from qfi_optics.cli.plotting import plot_sweep
from qfi_optics.cli.registry import EXIT_OK, Configure, Handler, get_command_registry
from qfi_optics.cli.sweep import SweepResult, parse_grid, run_sweep
from qfi_optics.config import get_settings
from qfi_optics.core.fisher import Metric, qfi_report
from qfi_optics.core.fock import LossMode, LossModel
from qfi_optics.errors import CertificationError, InputError
from qfi_optics.measurement import simulate_ml
from qfi_optics.optimize import (
    certify_optimum,
    fit_threshold_exponent,
    maximize_qfi,
    threshold,
)
from qfi_optics.strategies import optimal_result

logger = logging.getLogger(__name__)


def _argv(args: argparse.Namespace) -> list[str]:
    return list(getattr(args, "argv", []))


def _add_loss_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eta-a", type=float, default=1.0, help="Transmissivity of arm a")
    parser.add_argument("--eta-b", type=float, default=1.0, help="Transmissivity of arm b")


def _add_out_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")


def _loss(args: argparse.Namespace) -> LossModel:
    return LossModel(eta_a=args.eta_a, eta_b=args.eta_b)


# compute


def configure_compute(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("state", type=Path, help="State file (JSON)")
    _add_loss_arguments(parser)
    parser.add_argument("--metric", type=Metric, choices=list(Metric), default=Metric.EXACT)
    parser.add_argument("--phi", type=float, default=0.0, help="Phase of the output state")
    _add_out_argument(parser)


def handle_compute(args: argparse.Namespace) -> int:
    state = load_state(args.state)
    loss = _loss(args)
    try:
        report = qfi_report(state, loss, args.metric, args.phi)
    except ValidationError as e:
        raise CertificationError(f"inconsistent Fisher information values: {e}") from e
    meta = build_meta(_argv(args), {"qfi": report.metric})
    write_json(args.out, report, meta)
    return EXIT_OK


# optimize


def configure_optimize(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--photons", type=int, required=True, help="Photon number N")
    _add_loss_arguments(parser)
    parser.add_argument(
        "--metric",
        type=Metric,
        choices=[Metric.BOUND, Metric.ONE_ARM_CLOSED_FORM],
        default=None,
        help="Objective (default: closed form for one-arm losses, otherwise the bound)",
    )
    _add_out_argument(parser)
    parser.add_argument("--state-out", type=Path, default=None, help="Also write a state file")


def handle_optimize(args: argparse.Namespace) -> int:
    loss = _loss(args)
    metric = args.metric or (Metric.ONE_ARM_CLOSED_FORM if loss.is_one_arm else Metric.BOUND)
    result = maximize_qfi(args.photons, loss, metric)
    residual = certify_optimum(result, loss)
    logger.info(f"Certified optimum for N={args.photons}: F={result.objective:.10g}")
    payload = {
        **result.model_dump(mode="python"),
        "certified_residual": residual,
        "support": result.state.support,
    }
    meta = build_meta(_argv(args), {"objective": metric})
    write_json(args.out, payload, meta)
    if args.state_out is not None:
        save_state(args.state_out, result.state, meta)
    return EXIT_OK


# sweep


def configure_sweep(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--photons", type=int, required=True, help="Photon number N")
    parser.add_argument("--mode", type=LossMode, choices=list(LossMode), required=True)
    parser.add_argument("--grid", required=True, help="start:stop:steps with 0 < start")
    parser.add_argument(
        "--out",
        type=Path,
        default=None,
        help="Output stem; writes <stem>.json and <stem>.csv (default: JSON on stdout)",
    )
    parser.add_argument("--threads", type=int, default=None, help="Override QFI_OPTICS_THREADS")


def handle_sweep(args: argparse.Namespace) -> int:
    grid = parse_grid(args.grid)
    result = run_sweep(args.photons, args.mode, grid, threads=args.threads)
    meta = build_meta(_argv(args), {str(name): label for name, label in result.metrics.items()})
    if args.out is None:
        write_json(None, result, meta)
        return EXIT_OK
    write_json(args.out.with_suffix(".json"), result, meta)
    columns, rows = result.table()
    write_csv(args.out.with_suffix(".csv"), columns, rows, meta)
    if result.precision_gap is not None:
        logger.info(f"Largest precision-scale bound gap: {result.max_precision_gap:.3e}")
    return EXIT_OK


# threshold


def configure_threshold(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--photons", type=int, nargs="+", required=True, help="One or more photon numbers"
    )
    parser.add_argument("--mode", type=LossMode, choices=list(LossMode), required=True)
    parser.add_argument(
        "--fit", action="store_true", help="Fit eta_bar = a^(-1/N) over the photon numbers"
    )
    _add_out_argument(parser)


def handle_threshold(args: argparse.Namespace) -> int:
    results = [threshold(n, args.mode) for n in args.photons]
    payload: dict[str, object] = {"thresholds": results}
    if args.fit:
        if len(args.photons) < 2:
            raise InputError("the exponent fit needs at least two photon numbers")
        payload["fit"] = fit_threshold_exponent(args.mode, args.photons)
    methods = {str(r.n_photons): str(r.method) for r in results}
    write_json(args.out, payload, build_meta(_argv(args), methods))
    return EXIT_OK


# simulate


def configure_simulate(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--photons", type=int, default=None, help="Use the optimal N-photon state")
    parser.add_argument("--state", type=Path, default=None, help="State file instead")
    _add_loss_arguments(parser)
    parser.add_argument("--phi", type=float, default=0.0, help="True phase")
    parser.add_argument("--nu", type=int, default=10_000, help="Repetitions per estimate")
    parser.add_argument("--trials", type=int, default=200, help="Number of estimates")
    parser.add_argument("--seed", type=int, default=None, help="Override QFI_OPTICS_SEED")
    _add_out_argument(parser)


def handle_simulate(args: argparse.Namespace) -> int:
    loss = _loss(args)
    if (args.photons is None) == (args.state is None):
        raise InputError("give exactly one of --photons and --state")
    if args.state is not None:
        state = load_state(args.state)
    else:
        state = optimal_result(args.photons, loss).state
    seed = args.seed if args.seed is not None else get_settings().seed
    run = simulate_ml(
        state,
        loss,
        true_phase=args.phi,
        repetitions=args.nu,
        trials=args.trials,
        seed=seed,
    )
    payload = {
        **run.model_dump(mode="python"),
        "variance_ratio": run.variance_ratio,
        "within_band": run.within_band(),
        "weights": state.weights,
    }
    write_json(args.out, payload, build_meta(_argv(args), {"fisher": Metric.EXACT}, seed=seed))
    return EXIT_OK


# plot


def configure_plot(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("sweep", type=Path, help="Sweep JSON written by 'sweep --out'")
    parser.add_argument("--out", type=Path, default=None, help="SVG path (default: <sweep>.svg)")


def handle_plot(args: argparse.Namespace) -> int:
    document = read_json(args.sweep)
    if "result" not in document:
        raise InputError(f"{args.sweep} is not a sweep artifact")
    result = SweepResult.model_validate(document["result"])
    meta = build_meta(_argv(args), {str(name): label for name, label in result.metrics.items()})
    plot_sweep(result, args.out or args.sweep.with_suffix(".svg"), meta)
    return EXIT_OK


COMMANDS: dict[str, tuple[str, Configure, Handler]] = {
    "compute": ("Fisher information of a state file", configure_compute, handle_compute),
    "optimize": ("Loss-optimal probe state", configure_optimize, handle_optimize),
    "sweep": ("Compare strategies over a transmissivity grid", configure_sweep, handle_sweep),
    "threshold": (
        "Transmissivity where N00N stops being optimal",
        configure_threshold,
        handle_threshold,
    ),
    "simulate": (
        "Monte Carlo ML estimation with the optimal POVM",
        configure_simulate,
        handle_simulate,
    ),
    "plot": ("SVG figure from a sweep JSON", configure_plot, handle_plot),
}


def register_all_commands() -> None:
    """Register every subcommand with the global registry (idempotent)."""
    registry = get_command_registry()
    for name, (description, configure, handler) in COMMANDS.items():
        if name not in registry.command_names:
            registry.register_command(name, description, configure, handler)
