"""
Command-line subcommands.

Each module registers its subcommands on the shared subparser set.
"""

from app.commands import basic, classify, haar, relations, steinberg, stone, suite
from app.commands.report import RunReport

COMMAND_MODULES = (relations, stone, basic, classify, steinberg, haar, suite)


def register_all(subparsers, common) -> None:
    for module in COMMAND_MODULES:
        module.register(subparsers, common)


__all__ = ["RunReport", "register_all", "COMMAND_MODULES"]
