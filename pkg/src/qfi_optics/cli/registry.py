"""Subcommand registration and dispatch for the ``qfi-optics`` command line."""

import argparse
import logging
from collections.abc import Callable
from dataclasses import dataclass

from pydantic import ValidationError

from qfi_optics import __version__
from qfi_optics.errors import InputError, QfiOpticsError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = InputError.exit_code
EXIT_INTERNAL = QfiOpticsError.exit_code

Handler = Callable[[argparse.Namespace], int]
Configure = Callable[[argparse.ArgumentParser], None]


@dataclass(frozen=True)
class Command:
    name: str
    description: str
    configure: Configure
    handler: Handler


class CommandRegistry:
    """Holds the subcommands and maps their failures to exit codes."""

    def __init__(self, prog: str = "qfi-optics", version: str = __version__) -> None:
        self.prog = prog
        self.version = version
        self._commands: dict[str, Command] = {}

    def register_command(
        self,
        name: str,
        description: str,
        configure: Configure,
        handler: Handler,
    ) -> None:
        """Register a subcommand.

        Args:
            name: Subcommand name (e.g., "optimize")
            description: One-line help text
            configure: Adds the subcommand's arguments to its parser
            handler: Runs the command and returns the exit code
        """
        self._commands[name] = Command(name, description, configure, handler)
        logger.debug(f"Registered command: {name}")

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog=self.prog,
            description="Quantum Fisher information of lossy two-mode interferometers",
        )
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        parser.add_argument(
            "--log-level",
            choices=["debug", "info", "warning", "error"],
            default=None,
            help="Override QFI_OPTICS_LOG_LEVEL",
        )
        subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        for command in self._commands.values():
            sub = subparsers.add_parser(command.name, help=command.description)
            command.configure(sub)
        return parser

    def dispatch(self, args: argparse.Namespace) -> int:
        """Run the selected command; every failure becomes an exit code."""
        command = self._commands.get(args.command)
        if command is None:
            logger.error(f"Unknown command: {args.command}")
            return EXIT_INPUT
        try:
            return command.handler(args)
        except ValidationError as e:
            logger.error(f"Invalid input for '{command.name}': {e}")
            return EXIT_INPUT
        except (FileNotFoundError, IsADirectoryError) as e:
            logger.error(f"Cannot read input for '{command.name}': {e}")
            return EXIT_INPUT
        except QfiOpticsError as e:
            if e.exit_code == EXIT_INTERNAL:
                logger.exception(f"Error executing command {command.name}")
            else:
                logger.error(f"'{command.name}' failed: {e}")
            return e.exit_code
        except Exception:
            logger.exception(f"Error executing command {command.name}")
            return EXIT_INTERNAL

    @property
    def command_count(self) -> int:
        return len(self._commands)

    @property
    def command_names(self) -> list[str]:
        return list(self._commands.keys())


# Global command registry
_registry: CommandRegistry | None = None


def get_command_registry() -> CommandRegistry:
    """Get or create the global command registry."""
    global _registry
    if _registry is None:
        _registry = CommandRegistry()
    return _registry
