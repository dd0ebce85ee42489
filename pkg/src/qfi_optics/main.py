"""Console entrypoint for ``qfi-optics``."""

import logging
import sys
from collections.abc import Sequence

from qfi_optics import __version__
from qfi_optics.cli import get_command_registry, register_all_commands
from qfi_optics.config import get_settings

logger = logging.getLogger(__name__)


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    arguments = list(sys.argv[1:] if argv is None else argv)
    register_all_commands()
    registry = get_command_registry()
    parser = registry.build_parser()
    try:
        args = parser.parse_args(arguments)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return e.code if isinstance(e.code, int) else 0

    settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    logger.info(f"Starting qfi-optics v{__version__}: {args.command}")
    args.argv = arguments
    return registry.dispatch(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
