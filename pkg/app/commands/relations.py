"""
Relations and reconstruction commands.

``verify-relations`` compares the formula characterizations of the four
relations with their semantic evaluation; ``reconstruct`` builds the
spectrum of a family and, given a map, recovers its homeomorphism.
"""

import argparse
import logging

from app.commands.report import RunReport, refuted, verified
from app.config import settings
from app.services.funcrel import (
    ITEM_RELATION,
    RELATIONS,
    check_equi_expressibility,
    regularity_report,
    relation_matrix,
)
from app.services.ideals import all_ideals, perp_iso_check, recover_homeo, spectrum
from app.utils.errors import InstanceFormatError
from app.utils.serialization import load_family, load_map, read_json

logger = logging.getLogger(__name__)

CHECKS = ("equivalence", "regularity", "matrix")


def verify_relations(args: argparse.Namespace) -> RunReport:
    family = load_family(read_json(args.family))
    command = "verify-relations"

    if args.theorem == "regularity":
        verdict = regularity_report(family)
        grid = [str(p) for p in verdict.grid]
        if verdict.holds:
            return verified(command, weakly_regular=True, grid=grid)
        return refuted(command, verdict.failures, weakly_regular=False, grid=grid)

    if args.theorem == "matrix":
        return verified(command, matrices={kind: relation_matrix(kind, family) for kind in RELATIONS})

    unknown = [item for item in args.items if item not in ITEM_RELATION]
    if unknown:
        raise InstanceFormatError("Unknown formula items", {"items": unknown})
    report = check_equi_expressibility(family, args.items, cover_bound=settings.COVER_SIZE_BOUND)
    artifacts = {"backend": report.backend, "items": list(report.items), "pairs_checked": report.pairs_checked}
    if report.holds:
        return verified(command, **artifacts)
    return refuted(command, report.discrepancies, **artifacts)


def reconstruct(args: argparse.Namespace) -> RunReport:
    command = "reconstruct"
    family = load_family(read_json(args.family))
    spec = spectrum(family)
    artifacts = {
        "spectrum": spec.to_dict(),
        "ideals": len(all_ideals(family)),
        "space": spec.space.to_dict(),
    }
    if args.map:
        target = load_family(read_json(args.target)) if args.target else family
        T = load_map(read_json(args.map), family, target)
        phi = recover_homeo(T)
        artifacts["phi"] = {str(y): x for y, x in phi.items()}
        violations = perp_iso_check(T)
        if violations:
            return refuted(command, violations, **artifacts)
    if not spec.is_homeomorphism:
        return refuted(command, [{"reason": "kappa is not a homeomorphism", "kappa": spec.to_dict()["kappa"]}], **artifacts)
    return verified(command, **artifacts)


def register(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "verify-relations", parents=[common], help="Compare relation formulas with their semantics"
    )
    parser.add_argument("--family", required=True, help="Family JSON file")
    parser.add_argument("--theorem", choices=CHECKS, default="equivalence", help="Which check to run")
    parser.add_argument("--items", default="abcdef", help="Formula items to check, e.g. abcdef")
    parser.set_defaults(handler=verify_relations)

    parser = subparsers.add_parser(
        "reconstruct", parents=[common], help="Build the spectrum and recover the homeomorphism of a map"
    )
    parser.add_argument("--family", required=True, help="Source family JSON file")
    parser.add_argument("--map", help="Map JSON file")
    parser.add_argument("--target", help="Target family JSON file (default: the source family)")
    parser.set_defaults(handler=reconstruct)
