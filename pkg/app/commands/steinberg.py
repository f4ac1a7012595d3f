"""
Steinberg algebra commands.

``steinberg-decompose`` recovers the groupoid isomorphism and cocycle of a
diagonal-preserving isomorphism, or checks one structural property of the
algebra; ``enumerate-automorphisms`` lists the diagonal-preserving
automorphism group.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.services.steinberg import (
    condition_S_check,
    decompose_diagonal_preserving,
    enumerate_aut,
    is_topologically_principal,
    local_bisection_check,
)
from app.utils.errors import EnumerationCapExceeded, InstanceFormatError
from app.utils.serialization import load_algebra_map, load_groupoid, load_ring, read_json

logger = logging.getLogger(__name__)

PROPERTIES = ("local-bisection", "condition-s", "principal")


def _ring_argument(value: str):
    """``--ring`` takes a file or an inline name such as ``Z/3``."""
    if value.endswith(".json"):
        return load_ring(read_json(value))
    return load_ring(value)


def steinberg_decompose(args: argparse.Namespace) -> RunReport:
    command = "steinberg-decompose"
    G = load_groupoid(read_json(args.groupoid))
    R = _ring_argument(args.ring)

    if args.property == "local-bisection":
        report = local_bisection_check(G, R)
        if report.holds:
            return verified(command, **report.to_dict())
        return refuted(command, [report.to_dict()])
    if args.property == "condition-s":
        report = condition_S_check(G, R)
        if report.holds:
            return verified(command, **report.to_dict())
        return refuted(command, [{"nontrivial_units": report.nontrivial}], **report.to_dict())
    if args.property == "principal":
        if is_topologically_principal(G):
            return verified(command, principal=True)
        return refuted(command, [{"isotropy": {str(x): len(G.isotropy(x)) for x in G.units}}])

    if not args.map:
        raise InstanceFormatError("Give --map or --property")
    T = load_algebra_map(read_json(args.map), G, R)
    return verified(command, **decompose_diagonal_preserving(T, hypothesis_declared=args.assume_local_bisection).to_dict())


def enumerate_automorphisms(args: argparse.Namespace) -> RunReport:
    command = "enumerate-automorphisms"
    G = load_groupoid(read_json(args.groupoid))
    R = _ring_argument(args.ring)
    group = enumerate_aut(G, R, cross_check=not args.no_cross_check, hypothesis_declared=args.assume_local_bisection)
    if group.is_semidirect is None:
        raise EnumerationCapExceeded("Product rule check exceeds the cap", {"order": group.order})
    if group.is_semidirect:
        return verified(command, **group.to_dict())
    return refuted(command, [{"reason": "composition differs from the semidirect product"}], **group.to_dict())


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "steinberg-decompose", parents=[common], help="Decompose a diagonal-preserving isomorphism"
    )
    parser.add_argument("--groupoid", required=True, help="Groupoid JSON file")
    parser.add_argument("--ring", required=True, help="Ring JSON file or name such as Z/3")
    parser.add_argument("--map", help="Algebra map JSON file")
    parser.add_argument("--property", choices=PROPERTIES, help="Check a property instead of decomposing")
    parser.add_argument(
        "--assume-local-bisection", action="store_true", help="Declare the local bisection hypothesis instead of checking it"
    )
    parser.set_defaults(handler=steinberg_decompose)

    parser = subparsers.add_parser(
        "enumerate-automorphisms", parents=[common], help="List diagonal-preserving automorphisms"
    )
    parser.add_argument("--groupoid", required=True, help="Groupoid JSON file")
    parser.add_argument("--ring", required=True, help="Ring JSON file or name such as Z/3")
    parser.add_argument("--no-cross-check", action="store_true", help="Skip the exhaustive count")
    parser.add_argument(
        "--assume-local-bisection", action="store_true", help="Declare the local bisection hypothesis instead of checking it"
    )
    parser.set_defaults(handler=enumerate_automorphisms)
