"""Run reports: a serializable record of one experiment run.

A report bundles the configuration, the measured set sizes and exponents,
the inequality ledger, and content digests of the generated sets.  Emission
is byte-deterministic: identical configs (and seeds) produce identical
``report.json`` files, which the determinism check compares directly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from ..grid import GridSet
from .config import ExperimentConfig
from .ledger import InequalityLedger

__all__ = ["Report", "grid_digest", "emit_payload", "emit_report"]

SCHEMA_VERSION = 1


def grid_digest(a: GridSet) -> str:
    """Short content hash of a grid set (scale + cell payload)."""
    h = hashlib.sha256()
    h.update(a.m.to_bytes(4, "little"))
    h.update(a.as_array().astype("<i8").tobytes())
    return h.hexdigest()[:16]


def _plain(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Mapping):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (int, float, str, bool)):
        return value.item()  # numpy scalars
    return value


@dataclass
class Report:
    """Everything a run produced, ready for serialization."""

    mode: str
    config: ExperimentConfig
    ledger: InequalityLedger
    sizes: dict[str, int] = field(default_factory=dict)
    exponents: dict[str, float] = field(default_factory=dict)
    quantities: dict[str, Any] = field(default_factory=dict)
    targets: dict[str, float] = field(default_factory=dict)
    digests: dict[str, str] = field(default_factory=dict)
    profiles: dict[str, str] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    degraded: bool = False

    def to_obj(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "mode": self.mode,
            "config": self.config.to_dict(),
            "sizes": _plain(self.sizes),
            "exponents": _plain(self.exponents),
            "quantities": _plain(self.quantities),
            "targets": _plain(self.targets),
            "digests": dict(self.digests),
            "ledger": self.ledger.to_obj(),
            "notes": list(self.notes),
            "degraded": self.degraded,
        }

    def summary_lines(self) -> list[str]:
        """Human-readable digest for the CLI, one fact per line."""
        lines = [f"mode: {self.mode}   m={self.config.m}  eps={self.config.eps!r}"]
        if self.sizes:
            lines.append(
                "sizes: " + "  ".join(f"{k}={v}" for k, v in self.sizes.items())
            )
        if self.exponents:
            lines.append(
                "exponents: "
                + "  ".join(f"{k}={v:.6f}" for k, v in self.exponents.items())
            )
        for key, val in self.targets.items():
            lines.append(f"target {key} = {val!r}")
        hard = self.ledger.hard_entries()
        lines.append(
            f"ledger: {len(hard)} hard ({'all pass' if self.ledger.all_hard_pass() else 'VIOLATIONS'}), "
            f"{len(self.ledger.log_entries())} log-only, "
            f"max slack {self.ledger.max_log_slack()!r}"
        )
        flagged = self.ledger.flagged_names()
        if flagged:
            lines.append("flagged: " + ", ".join(flagged))
        if self.degraded:
            lines.append("degraded: structure extraction fell back to a trivial stage")
        for note in self.notes:
            lines.append(f"note: {note}")
        return lines


def _write_bytes(path: Path, payload: bytes) -> None:
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise OSError(f"cannot write report file {path}: {exc}") from exc


def emit_payload(
    obj: dict[str, Any],
    ledger_csv: str,
    profiles: Mapping[str, str],
    outdir: str | Path,
) -> list[Path]:
    """Write already-serialized run artifacts under ``outdir``.

    This is the byte-level half of :func:`emit_report`; the CLI uses it
    directly on service responses so files come out identical either way.
    """
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc

    written: list[Path] = []
    payload = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    json_path = out / "report.json"
    _write_bytes(json_path, payload.encode("utf-8"))
    written.append(json_path)

    csv_path = out / "ledger.csv"
    _write_bytes(csv_path, ledger_csv.encode("utf-8"))
    written.append(csv_path)

    for name in sorted(profiles):
        prof_path = out / f"{name}.csv"
        _write_bytes(prof_path, profiles[name].encode("utf-8"))
        written.append(prof_path)
    return written


def emit_report(report: Report, outdir: str | Path) -> list[Path]:
    """Write ``report.json``, ``ledger.csv`` and any profile CSVs under ``outdir``.

    Returns the written paths.  Output bytes depend only on the report
    contents: keys are sorted and floats use ``repr``.
    """
    return emit_payload(
        report.to_obj(), report.ledger.to_csv(), report.profiles, outdir
    )
