"""
Stone duality command.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.services.stone import (
    duality_roundtrip,
    duality_roundtrip_space,
    is_conditionally_complete,
    ro_equals_ko,
    spec,
)
from app.utils.errors import InstanceFormatError
from app.utils.serialization import load_algebra, load_space, read_json

logger = logging.getLogger(__name__)


def stone_duality(args: argparse.Namespace) -> RunReport:
    command = "stone-duality"
    if bool(args.algebra) == bool(args.space):
        raise InstanceFormatError("Give exactly one of --algebra and --space")

    if args.algebra:
        B = load_algebra(read_json(args.algebra))
        report = duality_roundtrip(B)
        artifacts = {
            "algebra": B.to_dict(),
            "spectrum": spec(B).to_dict(),
            "conditionally_complete": is_conditionally_complete(B),
            "roundtrip": report.to_dict(),
        }
    else:
        X = load_space(read_json(args.space))
        report = duality_roundtrip_space(X)
        artifacts = {"space": X.to_dict(), "ro_vs_ko": ro_equals_ko(X).to_dict(), "roundtrip": report.to_dict()}

    if report.verified:
        return verified(command, **artifacts)
    return refuted(command, [report.to_dict()], **artifacts)


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("stone-duality", parents=[common], help="Round-trip an algebra or a space")
    parser.add_argument("--algebra", help="Boolean algebra JSON file")
    parser.add_argument("--space", help="Finite space JSON file")
    parser.set_defaults(handler=stone_duality)
