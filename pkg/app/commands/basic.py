"""
Basic map extraction command.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.services.basicmaps import (
    extract_transform,
    nonvanishing_to_homeo,
    section_flags,
    unique_basic_phi,
)
from app.utils.serialization import load_family, load_map, load_point_map, read_json

logger = logging.getLogger(__name__)


def basic_extract(args: argparse.Namespace) -> RunReport:
    command = "basic-extract"
    source = load_family(read_json(args.source))
    target = load_family(read_json(args.target)) if args.target else source
    T = load_map(read_json(args.map), source, target)

    if args.nonvanishing:
        phi = nonvanishing_to_homeo(T)
        return verified(command, phi={str(y): x for y, x in phi.items()})

    if args.phi:
        phi = load_point_map(read_json(args.phi), target.points, source.points)
    else:
        phi = unique_basic_phi(T)
        if phi is None:
            return refuted(command, [{"reason": "no point map makes the map basic"}])
    transform = extract_transform(T, phi)
    flags = section_flags(T, phi)
    return verified(
        command,
        transform=transform.to_dict(),
        sections={str(y): v for y, v in flags.items()},
    )


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("basic-extract", parents=[common], help="Extract the transform of a basic map")
    parser.add_argument("--map", required=True, help="Map JSON file")
    parser.add_argument("--source", "--family", dest="source", required=True, help="Source family JSON file")
    parser.add_argument("--target", help="Target family JSON file (default: the source family)")
    parser.add_argument("--phi", help="Point map JSON file; searched for when omitted")
    parser.add_argument("--nonvanishing", action="store_true", help="Recover φ of a non-vanishing bijection")
    parser.set_defaults(handler=basic_extract)
