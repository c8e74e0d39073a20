"""Solve reports: decision, witness, counters, stage, optional timings.

Reports serialize to canonical JSON.  In deterministic mode timings are
omitted so repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class SolveReport:
    problem: str
    k: int
    decision: bool
    stage: str
    witness: Optional[dict] = None
    cut_witness: Optional[dict] = None
    counters: dict = field(default_factory=dict)
    validation: Optional[dict] = None
    timings: Optional[dict] = None
    deterministic: bool = True

    def to_json_dict(self) -> dict:
        out = {
            "problem": self.problem,
            "k": self.k,
            "decision": self.decision,
            "stage": self.stage,
            "witness": self.witness,
            "counters": dict(sorted(self.counters.items())),
        }
        if self.cut_witness is not None:
            out["cut_witness"] = self.cut_witness
        if self.validation is not None:
            out["validation"] = self.validation
        if not self.deterministic and self.timings is not None:
            out["timings"] = self.timings
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"
