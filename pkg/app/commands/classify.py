"""
Weighted composition decomposition command.
"""

import argparse
import logging

from app.commands.report import RunReport, verified
from app.services.classify import (
    MODES,
    additive_decompose,
    kaplansky_recover_phi,
    weighted_decompose,
)
from app.utils.errors import InstanceFormatError
from app.utils.serialization import load_density, load_family, load_map, read_json

logger = logging.getLogger(__name__)

ALL_MODES = ("kaplansky", "additive") + MODES


def classify_decompose(args: argparse.Namespace) -> RunReport:
    command = "classify-decompose"
    source = load_family(read_json(args.family))
    target = load_family(read_json(args.target)) if args.target else source
    T = load_map(read_json(args.map), source, target)

    if args.mode == "kaplansky":
        phi = kaplansky_recover_phi(T)
        return verified(command, mode="kaplansky", phi={str(y): x for y, x in phi.items()})
    if args.mode == "additive":
        return verified(command, **additive_decompose(T).to_dict())

    mu_x = mu_y = None
    if args.mode == "l1":
        if not args.density:
            raise InstanceFormatError("Mode l1 needs --density")
        mu_x, mu_y = load_density(read_json(args.density), source, target)
    return verified(command, **weighted_decompose(T, args.mode, mu_x, mu_y).to_dict())


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "classify-decompose", parents=[common], help="Decompose a map as a weighted composition"
    )
    parser.add_argument("--map", required=True, help="Map JSON file")
    parser.add_argument("--family", "--source", dest="family", required=True, help="Source family JSON file")
    parser.add_argument("--target", help="Target family JSON file (default: the source family)")
    parser.add_argument("--mode", choices=ALL_MODES, required=True, help="Decomposition mode")
    parser.add_argument("--density", help="Density JSON file (l1 mode)")
    parser.set_defaults(handler=classify_decompose)
