"""
Run reports.

Every subcommand produces one ``RunReport``; the CLI prints it as JSON on
standard output and derives the exit code from its status.
"""

import json
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, model_validator

from app.services.fintop import point_key
from app.utils.errors import VerificationError
from app.utils.exact import GaussianRational, to_json_number

Status = Literal["verified", "refuted", "error"]

EXIT_CODES: Dict[str, int] = {"verified": 0, "refuted": 1, "error": 2}


class RunReport(BaseModel):
    """Outcome of one command."""

    command: str
    status: Status
    witnesses: List[Dict[str, Any]] = []
    artifacts: Dict[str, Any] = {}
    timing: Optional[float] = None

    @model_validator(mode="after")
    def _witnesses_match_status(self) -> "RunReport":
        if self.status == "refuted" and not self.witnesses:
            raise ValueError("A refuted report needs at least one witness")
        if self.status == "verified" and self.witnesses:
            raise ValueError("A verified report carries no witnesses")
        return self

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(exclude_none=True), indent=2, ensure_ascii=False, default=_encode)


def verified(command: str, **artifacts: Any) -> RunReport:
    return RunReport(command=command, status="verified", artifacts=artifacts)


def refuted(command: str, witnesses: List[Dict[str, Any]], **artifacts: Any) -> RunReport:
    return RunReport(command=command, status="refuted", witnesses=witnesses or [{"reason": "unspecified"}], artifacts=artifacts)


def from_error(command: str, error: VerificationError) -> RunReport:
    """A refutation becomes ``refuted``; an invalid instance becomes ``error``."""
    status = "refuted" if error.exit_code == 1 else "error"
    return RunReport(command=command, status=status, witnesses=[error.to_dict()])


def _encode(value: Any) -> Any:
    if isinstance(value, (Fraction, GaussianRational)):
        return to_json_number(value)
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=point_key)
    return str(value)
