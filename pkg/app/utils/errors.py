"""
Error hierarchy for verification and decomposition.

Every failure carries a ``witness`` dictionary so a report can replay the
violation. ``InvalidInstance`` errors mean the input was malformed or out
of range (exit code 2); ``Refutation`` errors mean a checked property or a
theorem hypothesis does not hold on a well-formed instance (exit code 1).
"""

from typing import Any, Dict, Optional


class VerificationError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.witness = witness or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "witness": self.witness}


class InvalidInstance(VerificationError):
    exit_code = 2


class Refutation(VerificationError):
    exit_code = 1


# Instance errors

class InstanceFormatError(InvalidInstance):
    pass


class TopologyInvalid(InvalidInstance):
    pass


class PointOutOfSpace(InvalidInstance):
    pass


class NotOpen(InvalidInstance):
    pass


class RegionsOverlap(InvalidInstance):
    pass


class GapEmpty(InvalidInstance):
    pass


class DomainMismatch(InvalidInstance):
    pass


class DensityNotPositive(InvalidInstance):
    pass


class NotPiecewiseLinear(InvalidInstance):
    pass


class NotInFamily(InvalidInstance):
    pass


class SectionDomainGap(InvalidInstance):
    pass


class FamilyNotSubmodel(InvalidInstance):
    pass


class NotGroupFamily(InvalidInstance):
    pass


class NotBijection(InvalidInstance):
    pass


class MissingIndicators(InvalidInstance):
    pass


class GroupoidAxiomViolation(InvalidInstance):
    pass


class InvarianceViolation(InvalidInstance):
    pass


class NotFullySupported(InvalidInstance):
    pass


class ModulusNotRational(InvalidInstance):
    pass


class TrivialAlgebra(InvalidInstance):
    pass


class CapExceeded(InvalidInstance):
    pass


class SearchCapExceeded(CapExceeded):
    pass


class EnumerationCapExceeded(CapExceeded):
    pass


# Refutations

class RegularityUndecidablePL(Refutation):
    pass


class NotWeaklyRegular(Refutation):
    pass


class NotZeroDimensional(Refutation):
    pass


class NotPerpPerpIso(Refutation):
    pass


class NoSuchHomeo(Refutation):
    pass


class NotBasic(Refutation):
    pass


class MultipleBasicPhi(Refutation):
    pass


class NotNonvanishing(Refutation):
    pass


class NotLatticeIso(Refutation):
    pass


class NoConsistentPhi(Refutation):
    pass


class FormulaMismatch(Refutation):
    pass


class HypothesisFailed(Refutation):
    """A named theorem hypothesis does not hold on the instance."""

    def __init__(self, which: str, message: str, witness: Optional[Dict[str, Any]] = None):
        super().__init__(message, witness)
        self.which = which

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["hypothesis"] = self.which
        return data


class NotDiagonalPreserving(Refutation):
    pass


class NotRingIso(Refutation):
    pass


class DecompositionFailed(Refutation):
    pass


class TheoremViolation(Refutation):
    """Two independent computations that must agree did not."""
