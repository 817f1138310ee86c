"""Identity reports shared by the verification suites."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any, Callable, List, Optional


@dataclass
class IdentityResult:
    identity_id: str
    calculus: str
    dimension: str
    status: str
    residual_terms: int
    elapsed_ms: float
    residual: Any = field(default=None, repr=False, compare=False)
    note: str = ""

    def as_dict(self, timing: bool = True) -> dict:
        d = {
            "identity_id": self.identity_id,
            "calculus": self.calculus,
            "dimension": self.dimension,
            "status": self.status,
            "residual_terms": self.residual_terms,
            "elapsed_ms": round(self.elapsed_ms, 3) if timing else 0.0,
        }
        if self.note:
            d["note"] = self.note
        return d


def term_count(x) -> int:
    if hasattr(x, "term_count"):
        return x.term_count()
    if hasattr(x, "terms"):
        return len(x.terms)
    if isinstance(x, (list, tuple)):
        return sum(term_count(y) for y in x)
    return 0 if x == 0 else 1


class Report:
    """Ordered collection of identity results."""

    def __init__(self, keep_residuals: bool = False):
        self.results: List[IdentityResult] = []
        self.keep_residuals = keep_residuals

    def add(self, identity_id: str, calc, fn: Callable[[], Any], note: str = "") -> IdentityResult:
        start = time.perf_counter()
        residual = fn()
        if hasattr(calc, "finalize"):
            residual = calc.finalize(residual)
        elapsed = (time.perf_counter() - start) * 1000.0
        n = term_count(residual)
        res = IdentityResult(
            identity_id=identity_id,
            calculus=getattr(calc, "name", str(calc)),
            dimension=getattr(calc, "label", ""),
            status="pass" if n == 0 else "fail",
            residual_terms=n,
            elapsed_ms=elapsed,
            residual=residual if (self.keep_residuals or n) else None,
            note=note,
        )
        self.results.append(res)
        return res

    def add_bool(self, identity_id: str, calc, ok: bool, note: str = "", elapsed_ms: float = 0.0):
        res = IdentityResult(identity_id, getattr(calc, "name", str(calc)), getattr(calc, "label", ""),
                             "pass" if ok else "fail", 0 if ok else 1, elapsed_ms, note=note)
        self.results.append(res)
        return res

    def extend(self, other: "Report") -> "Report":
        self.results.extend(other.results)
        return self

    @property
    def passed(self) -> bool:
        return all(r.status == "pass" for r in self.results)

    def failures(self) -> List[IdentityResult]:
        return [r for r in self.results if r.status != "pass"]

    def __len__(self):
        return len(self.results)

    def __iter__(self):
        return iter(self.results)

    def to_json(self, timing: bool = True) -> str:
        return json.dumps([r.as_dict(timing) for r in self.results], indent=2, sort_keys=False)

    def summary(self) -> str:
        bad = self.failures()
        return f"{len(self.results) - len(bad)}/{len(self.results)} identities pass"
