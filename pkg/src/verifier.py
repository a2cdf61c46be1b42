import asyncio
import sys
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from itertools import permutations
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .catalog import (KNOWN_DIAGONALS, DiagonalRepresentation, SequenceEntry, binomial_terms, catalog_entries,
                      recurrence_terms)
from .config import get_settings
from .index_sets import prop12_terms
from .laurent import ct_sequence, rational_diagonal_prefix
from .polytope import origin_only_interior

ETA_WITNESSES = frozenset(p for base in ((1, 0, 0), (1, 1, 0)) for p in permutations(base))

PROP12_SEQUENCES = ("B", "F", "delta")


class CheckState(Enum):
    PENDING = "pending"
    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"


@dataclass
class CheckEvent:
    kind: str
    subject: str
    state: CheckState = CheckState.PENDING
    detail: Dict[str, Any] = field(default_factory=dict)
    timestamp: datetime = field(default_factory=datetime.now)

    @property
    def passed(self) -> bool:
        return self.state is CheckState.PASSED

    def to_json(self) -> dict:
        return {"kind": self.kind, "subject": self.subject, "state": self.state.value, "detail": self.detail}


@dataclass
class VerificationSummary:
    events: List[CheckEvent]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.events)

    @property
    def first_failure(self) -> Optional[CheckEvent]:
        return next((e for e in self.events if not e.passed), None)

    def to_json(self) -> dict:
        failure = self.first_failure
        return {
            "passed": self.passed,
            "checks": [e.to_json() for e in self.events],
            "first_failure": failure.to_json() if failure else None,
        }


def _strs(values: Sequence[int]) -> List[str]:
    return [str(v) for v in values]


def _first_mismatch(left: Sequence[int], right: Sequence[int]) -> Optional[int]:
    return next((n for n, (a, b) in enumerate(zip(left, right)) if a != b), None)


# ------------------------------------------------------------------ checks

def check_agreement(entry: SequenceEntry, depth_2var: int, depth_3var: int) -> CheckEvent:
    """Recurrence, every binomial formula and every CT polynomial on a common prefix."""
    event = CheckEvent("agreement", entry.name)
    depth_for = {rep.label: depth_2var if rep.dim == 2 else depth_3var for rep in entry.representations}
    depth = max(depth_for.values())
    reference = recurrence_terms(entry.recurrence, depth)

    sources = {f"binomial:{f}": binomial_terms(entry.name, depth, f) for f in entry.binomial_formulas}
    for rep in entry.representations:
        sources[f"ct:{rep.label}"] = ct_sequence(rep.poly, depth_for[rep.label])

    for label, values in sources.items():
        n = _first_mismatch(reference, values)
        if n is not None:
            event.state = CheckState.FAILED
            event.detail = {"representation": label, "n": n,
                            "recurrence": str(reference[n]), "found": str(values[n])}
            return event
    event.state = CheckState.PASSED
    event.detail = {"depth": depth, "representations": sorted(sources), "prefix": _strs(reference)}
    return event


def check_prop12(entry: SequenceEntry, depth: int) -> CheckEvent:
    event = CheckEvent("prop12", entry.name)
    reference = recurrence_terms(entry.recurrence, depth)
    values = prop12_terms(entry.name, depth)
    n = _first_mismatch(reference, values)
    if n is None:
        event.state = CheckState.PASSED
        event.detail = {"depth": depth}
    else:
        event.state = CheckState.FAILED
        event.detail = {"n": n, "recurrence": str(reference[n]), "found": str(values[n])}
    return event


def check_polytope(entry: SequenceEntry) -> CheckEvent:
    event = CheckEvent("polytope", entry.name)
    verdicts = {}
    for rep in entry.representations:
        if not rep.polytope_asserted:
            continue
        verdict = origin_only_interior(rep.polytope_poly)
        verdicts[rep.label] = verdict.to_json()
        if verdict.passed != entry.polytope_origin_only:
            event.state = CheckState.FAILED
        elif not entry.polytope_origin_only and entry.name == "eta" and set(verdict.witnesses) != ETA_WITNESSES:
            event.state = CheckState.FAILED
    if event.state is CheckState.PENDING:
        event.state = CheckState.PASSED
    event.detail = {"expected_origin_only": entry.polytope_origin_only, "verdicts": verdicts}
    return event


def check_diagonal(diagonal: DiagonalRepresentation, entry: SequenceEntry, depth: int) -> CheckEvent:
    """A diagonal may produce u_n or (-1)^n u_n; both conventions are accepted and reported."""
    event = CheckEvent("diagonal", diagonal.label)
    reference = recurrence_terms(entry.recurrence, depth)
    values = rational_diagonal_prefix(diagonal.denominator_poly(), depth)
    if values == reference:
        convention = "direct"
    elif values == [(-1) ** n * v for n, v in enumerate(reference)]:
        convention = "alternating"
    else:
        n = _first_mismatch(reference, values)
        event.state = CheckState.FAILED
        event.detail = {"sequence": entry.name, "n": n, "recurrence": str(reference[n]), "found": str(values[n])}
        return event
    event.state = CheckState.PASSED
    event.detail = {"sequence": entry.name, "depth": depth, "sign": convention}
    return event


# ---------------------------------------------------------------- runner

class CatalogVerifier:
    def __init__(
        self,
        depth_2var: Optional[int] = None,
        depth_3var: Optional[int] = None,
        entries: Optional[Sequence[SequenceEntry]] = None,
        prop12_depth: int = 8,
        diagonal_depth: Optional[int] = None,
        shuffle_seed: Optional[int] = None
    ):
        settings = get_settings()
        self.depth_2var = settings.depth_2var if depth_2var is None else depth_2var
        self.depth_3var = settings.depth_3var if depth_3var is None else depth_3var
        self.entries = catalog_entries() if entries is None else list(entries)
        self.prop12_depth = prop12_depth
        self.diagonal_depth = settings.diagonal_depth if diagonal_depth is None else diagonal_depth
        # submission order only; reported order is always the catalog order
        self.shuffle_seed = shuffle_seed
        self.verbose = settings.verbose

        self.event_handlers: List[Callable[[CheckEvent], Any]] = []
        self.event_history: List[CheckEvent] = []
        self.max_history_size = 1000

    def _log(self, message: str):
        if self.verbose:
            print(f"[VERIFY] {message}", file=sys.stderr)

    def _planned_checks(self) -> List[Tuple[str, str, Callable[[], CheckEvent]]]:
        by_name = {e.name: e for e in self.entries}
        checks = []
        for entry in self.entries:
            checks.append(("agreement", entry.name,
                           lambda entry=entry: check_agreement(entry, self.depth_2var, self.depth_3var)))
            if entry.name in PROP12_SEQUENCES:
                checks.append(("prop12", entry.name, lambda entry=entry: check_prop12(entry, self.prop12_depth)))
            if any(rep.polytope_asserted for rep in entry.representations):
                checks.append(("polytope", entry.name, lambda entry=entry: check_polytope(entry)))
        if self.diagonal_depth > 0:
            for diagonal in KNOWN_DIAGONALS:
                if diagonal.sequence in by_name:
                    entry = by_name[diagonal.sequence]
                    checks.append(("diagonal", diagonal.label,
                                   lambda d=diagonal, e=entry: check_diagonal(d, e, self.diagonal_depth)))
        return checks

    @staticmethod
    def _guarded(kind: str, subject: str, check: Callable[[], CheckEvent]) -> CheckEvent:
        try:
            return check()
        except Exception as e:
            return CheckEvent(kind, subject, CheckState.ERROR, {"error": str(e), "type": type(e).__name__})

    async def run(self) -> VerificationSummary:
        checks = self._planned_checks()
        self._log(f"Running {len(checks)} checks (depths {self.depth_2var}/{self.depth_3var}, "
                  f"prop12 {self.prop12_depth}, diagonals {self.diagonal_depth})")
        loop = asyncio.get_running_loop()
        order = range(len(checks))
        if self.shuffle_seed is not None:
            order = [int(i) for i in np.random.default_rng(self.shuffle_seed).permutation(len(checks))]
        futures = {i: loop.run_in_executor(None, self._guarded, *checks[i]) for i in order}
        events = await asyncio.gather(*(futures[i] for i in range(len(checks))))
        for event in events:
            await self._trigger_event(event)
        summary = VerificationSummary(list(events))
        if summary.passed:
            self._log(f"✓ All {len(events)} checks passed")
        else:
            failure = summary.first_failure
            self._log(f"✗ First failure: {failure.kind} {failure.subject} {failure.detail}")
        return summary

    async def _trigger_event(self, event: CheckEvent):
        self.event_history.append(event)
        if len(self.event_history) > self.max_history_size:
            self.event_history.pop(0)

        mark = "✓" if event.passed else "✗"
        self._log(f"{mark} {event.kind} {event.subject}")
        for i, handler in enumerate(self.event_handlers):
            try:
                if asyncio.iscoroutinefunction(handler):
                    await handler(event)
                else:
                    handler(event)
            except Exception as e:
                self._log(f"Handler {i+1}: ✗ Error - {e}")

    def add_event_handler(self, handler: Callable[[CheckEvent], Any]):
        self.event_handlers.append(handler)

    def remove_event_handler(self, handler: Callable[[CheckEvent], Any]):
        if handler in self.event_handlers:
            self.event_handlers.remove(handler)

    def get_status(self) -> dict:
        failed = [e for e in self.event_history if not e.passed]
        return {
            "entries": len(self.entries),
            "checks_recorded": len(self.event_history),
            "failures": len(failed),
        }
