"""Check reports: pass/fail verdicts with exact residue witnesses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .superpoly import SuperPolynomial, to_text


@dataclass
class Violation:
    identity: str
    location: Tuple[str, ...]
    residue: Any  # SuperPolynomial or plain text

    @property
    def residue_text(self) -> str:
        if isinstance(self.residue, SuperPolynomial):
            return to_text(self.residue)
        if hasattr(self.residue, "to_text"):
            return self.residue.to_text()
        return str(self.residue)

    def to_dict(self):
        return {"identity": self.identity, "location": list(self.location), "residue": self.residue_text}


@dataclass
class Report:
    kind: str
    subject: str
    violations: List[Violation] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    elapsed_ms: Optional[float] = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "fail" if self.violations else "pass"

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def __bool__(self):
        return self.passed

    def fail(self, identity: str, location, residue=""):
        if isinstance(location, str):
            location = (location,)
        self.violations.append(Violation(identity, tuple(str(x) for x in location), residue))

    def merge(self, other: "Report", prefix: str = ""):
        """Absorb another report's violations, tagging identities with ``prefix``."""
        for v in other.violations:
            ident = f"{prefix}{v.identity}" if prefix else v.identity
            self.violations.append(Violation(ident, v.location, v.residue))
        if other.error and not self.error:
            self.error = other.error

    def to_dict(self, timing: bool = False):
        out = {
            "kind": self.kind,
            "subject": self.subject,
            "status": self.status,
            "violations": [v.to_dict() for v in self.violations],
        }
        if self.details:
            out["details"] = self.details
        if self.error is not None:
            out["error"] = self.error
        if timing and self.elapsed_ms is not None:
            out["elapsed_ms"] = round(self.elapsed_ms, 3)
        return out

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), ensure_ascii=False)
