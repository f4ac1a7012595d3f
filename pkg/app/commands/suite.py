"""
Acceptance suite command.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.config import settings
from app.services.suites import SUITE_IDS, run_suites

logger = logging.getLogger(__name__)


def suite(args: argparse.Namespace) -> RunReport:
    results = run_suites(max_size=args.max_size, seed=args.seed, only=args.only)
    timing = args.timing or settings.REPORT_TIMING
    summaries = [r.to_dict(timing=timing) for r in results]
    witnesses = [{"suite_id": r.suite_id, **w} for r in results for w in r.failures[:10]]
    if witnesses:
        return refuted("suite", witnesses, suites=summaries)
    return verified("suite", suites=summaries)


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("suite", parents=[common], help="Run the acceptance suites")
    parser.add_argument("--max-size", type=int, default=4, help="Cap on every suite's size parameter")
    parser.add_argument("--seed", type=int, default=None, help="Seed of the randomized cases")
    parser.add_argument("--only", nargs="+", choices=SUITE_IDS, help="Suites to run")
    parser.set_defaults(handler=suite)
