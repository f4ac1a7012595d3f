"""
Haar-weighted convolution algebra command.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.services.haarconv import verify_ir_decomposition, verify_measured_decomposition
from app.utils.errors import InstanceFormatError
from app.utils.serialization import load_convolution_map, load_groupoid, load_haar, load_measure, read_json

logger = logging.getLogger(__name__)


def haar_verify(args: argparse.Namespace) -> RunReport:
    command = "haar-verify"
    G = load_groupoid(read_json(args.groupoid))
    source = load_haar(read_json(args.haar), G) if args.haar else load_haar({"counting": True}, G)
    instance = load_convolution_map(read_json(args.map), source)
    T = instance.T

    if args.norm == "l1":
        if not args.measure:
            raise InstanceFormatError("Norm l1 needs --measure")
        source_measure = load_measure(read_json(args.measure), G)
        target_measure = instance.target_measure
        if target_measure is None:
            if T.target.G is not G:
                raise InstanceFormatError("Map file must give target_measure for another groupoid")
            target_measure = source_measure
        report = verify_measured_decomposition(T, source_measure, target_measure, instance.declared)
    else:
        report = verify_ir_decomposition(T, instance.declared)

    if report.verified:
        return verified(command, **report.to_dict())
    return refuted(command, report.witnesses or [{"checks": report.checks}], **report.to_dict())


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("haar-verify", parents=[common], help="Decompose an isometric algebra isomorphism")
    parser.add_argument("--groupoid", required=True, help="Groupoid JSON file")
    parser.add_argument("--haar", help="Haar system JSON file (default: counting)")
    parser.add_argument("--measure", help="Unit measure JSON file (l1 norm)")
    parser.add_argument("--map", required=True, help="Convolution map JSON file")
    parser.add_argument("--norm", choices=("l1", "ir"), default="l1", help="Norm the map preserves")
    parser.set_defaults(handler=haar_verify)
