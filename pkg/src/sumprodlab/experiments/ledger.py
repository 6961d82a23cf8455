"""Inequality ledger: one typed row per step of an experiment chain.

Every run walks a fixed chain of inequalities.  Steps come in two kinds:

* ``hard`` -- identities and inequalities that hold exactly in the lattice
  model.  The comparison is done by the *caller* in integer or Fraction
  arithmetic and the boolean verdict is stored; the lhs/rhs floats on the
  row are for display only and never participate in the check.
* ``log`` -- one-sided bounds that are only true up to an unspecified
  power of 1/delta.  For these the row records the measured slack exponent
  ``log_{1/delta}(lhs / rhs)``, oriented so that small (or negative) slack
  means the bound holds comfortably.  A row is flagged when its slack
  exceeds ``10 * eps``.

The ledger refuses duplicate step names, so "every chain step has exactly
one entry" is enforced structurally rather than by convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = ["LedgerEntry", "InequalityLedger"]


def _as_float(x: int | float | Fraction) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


@dataclass(frozen=True)
class LedgerEntry:
    """One evaluated chain step.

    ``slack`` is ``log_{1/delta}(lhs/rhs)`` for log rows and ``None`` for
    hard rows (hard rows either pass exactly or fail, there is no budget to
    measure).  Degenerate log rows with a nonpositive side also carry
    ``slack=None``; they are flagged so they cannot silently vanish.
    """

    name: str
    detail: str
    kind: str  # "hard" | "log"
    lhs: float
    rhs: float
    passed: bool | None
    slack: float | None
    flagged: bool

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return math.inf if self.lhs > 0 else 0.0
        return self.lhs / self.rhs

    def to_obj(self) -> dict:
        ratio = self.ratio
        return {
            "name": self.name,
            "detail": self.detail,
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": ratio if math.isfinite(ratio) else None,
            "passed": self.passed,
            "slack": self.slack,
            "flagged": self.flagged,
        }


@dataclass
class InequalityLedger:
    """Ordered collection of chain steps for one run.

    ``m`` fixes the scale so slack exponents are measured against
    delta = 2**-m; ``eps`` fixes the flagging budget ``10 * eps``.
    """

    m: int
    eps: float
    entries: list[LedgerEntry] = field(default_factory=list)

    def _add(self, entry: LedgerEntry) -> LedgerEntry:
        if any(e.name == entry.name for e in self.entries):
            raise ValueError(f"duplicate ledger entry name: {entry.name!r}")
        self.entries.append(entry)
        return entry

    def hard(
        self,
        name: str,
        detail: str,
        ok: bool,
        lhs: int | float | Fraction,
        rhs: int | float | Fraction,
    ) -> LedgerEntry:
        """Record an exactly-checked step; ``ok`` must come from exact arithmetic."""
        return self._add(
            LedgerEntry(
                name=name,
                detail=detail,
                kind="hard",
                lhs=_as_float(lhs),
                rhs=_as_float(rhs),
                passed=bool(ok),
                slack=None,
                flagged=not ok,
            )
        )

    def log(
        self,
        name: str,
        detail: str,
        lhs: int | float | Fraction,
        rhs: int | float | Fraction,
    ) -> LedgerEntry:
        """Record a measured one-sided bound, oriented so lhs <~ rhs."""
        lf, rf = _as_float(lhs), _as_float(rhs)
        if lf > 0 and rf > 0:
            slack = (math.log2(lf) - math.log2(rf)) / self.m
            flagged = slack > 10.0 * self.eps
        else:
            slack = None
            flagged = True
        return self._add(
            LedgerEntry(
                name=name,
                detail=detail,
                kind="log",
                lhs=lf,
                rhs=rf,
                passed=None,
                slack=slack,
                flagged=flagged,
            )
        )

    # -- summaries -------------------------------------------------------------

    def hard_entries(self) -> list[LedgerEntry]:
        return [e for e in self.entries if e.kind == "hard"]

    def log_entries(self) -> list[LedgerEntry]:
        return [e for e in self.entries if e.kind == "log"]

    def all_hard_pass(self) -> bool:
        return all(e.passed for e in self.hard_entries())

    def max_log_slack(self) -> float | None:
        slacks = [e.slack for e in self.log_entries() if e.slack is not None]
        return max(slacks) if slacks else None

    def flagged_names(self) -> list[str]:
        return [e.name for e in self.entries if e.flagged]

    def to_obj(self) -> list[dict]:
        return [e.to_obj() for e in self.entries]

    def to_csv(self) -> str:
        lines = ["name,kind,lhs,rhs,ratio,slack,passed,flagged"]
        for e in self.entries:
            passed = "" if e.passed is None else str(e.passed).lower()
            slack = "" if e.slack is None else repr(e.slack)
            lines.append(
                f"{e.name},{e.kind},{e.lhs!r},{e.rhs!r},{e.ratio!r},"
                f"{slack},{passed},{str(e.flagged).lower()}"
            )
        return "\n".join(lines) + "\n"
