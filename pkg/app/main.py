"""
Command-line entry point.

This module builds the argument parser, registers every subcommand group,
runs the selected handler and turns its outcome (or the error it raised)
into a RunReport printed on standard output.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from app.commands import RunReport, register_all
from app.commands.report import from_error
from app.config import settings
from app.utils.errors import VerificationError
from app.utils.logger import log_error, log_verification, setup_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json-out", metavar="PATH", help="Also write the report to PATH")
    common.add_argument("--timing", action="store_true", help="Add timing to the report")
    common.add_argument("--log-level", default=None, help="Logging level (default: settings.LOG_LEVEL)")

    parser = argparse.ArgumentParser(
        prog="reconstruct",
        description=f"{settings.APP_NAME} {settings.APP_VERSION}: exact reconstruction and decomposition checks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    register_all(subparsers, common)
    return parser


def _emit(report: RunReport, json_out: Optional[str]) -> None:
    text = report.to_json()
    print(text)
    if json_out:
        Path(json_out).write_text(text + "\n", encoding="utf-8")


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Command-line arguments without the program name

    Returns:
        int: 0 when verified, 1 when refuted, 2 on invalid input or usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    setup_logging(log_level=args.log_level)
    start_time = time.perf_counter()
    try:
        report = args.handler(args)
    except VerificationError as e:
        logger.warning(f"{args.command}: {type(e).__name__}: {e.message}")
        report = from_error(args.command, e)
    except Exception as e:
        log_error(e, {"command": args.command})
        report = RunReport(
            command=args.command,
            status="error",
            witnesses=[{"error": type(e).__name__, "message": str(e)}],
        )

    processing_time = time.perf_counter() - start_time
    if args.timing or settings.REPORT_TIMING:
        report.timing = round(processing_time * 1000, 3)
    log_verification(
        command=args.command,
        status=report.status,
        witness_count=len(report.witnesses),
        request_data={k: v for k, v in vars(args).items() if k != "handler"},
        processing_time=processing_time,
    )
    _emit(report, args.json_out)
    return report.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
