"""
Verification reports: per-check records, JSON/CSV emission and the console summary.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np

from errors import InvalidConfig, IoFailure

DEFAULT_SEED = 20240611
REPORT_FORMATS = ("json", "csv")
CSV_COLUMNS = ["suite", "check", "anchor", "max_residual", "tolerance", "pass"]


@dataclass
class CheckRecord:
    check: str
    anchor: str
    samples: int
    max_residual: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.max_residual) and self.max_residual < self.tolerance

    def to_dict(self) -> dict:
        record = {
            "check": self.check,
            "anchor": self.anchor,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.note:
            record["note"] = self.note
        return record


@dataclass
class VerificationReport:
    suite: str
    geometry: str
    seed: int = DEFAULT_SEED
    deriv: str = "dual"
    tolerances: Dict[str, float] = field(default_factory=dict)
    checks: List[CheckRecord] = field(default_factory=list)
    elapsed_ms: float = 0.0
    skipped: Optional[str] = None

    def add(self, check: str, anchor: str, residuals, tolerance: float, note: str = "") -> CheckRecord:
        """
        Record the worst residual of a check.

        Args:
            check: Check id, also the key for tolerance overrides
            anchor: The identity being verified, in words
            residuals: One residual or an iterable of per-sample residuals
            tolerance: Default tolerance; an override in self.tolerances wins
            note: Free text shown in reports (observed signature, etc.)
        """
        if hasattr(residuals, "__next__"):
            residuals = list(residuals)
        values = np.asarray(residuals, dtype=float).ravel()
        worst = float(np.max(values)) if values.size else 0.0
        if np.any(np.isnan(values)):
            worst = float("inf")
        record = CheckRecord(
            check=check,
            anchor=anchor,
            samples=int(values.size),
            max_residual=worst,
            tolerance=float(self.tolerances.get(check, tolerance)),
            note=note,
        )
        self.checks.append(record)
        return record

    def skip(self, reason: str) -> "VerificationReport":
        self.skipped = reason
        return self

    def check(self, name: str) -> CheckRecord:
        for record in self.checks:
            if record.check == name:
                return record
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.checks)

    def to_dict(self) -> dict:
        data = {
            "suite": self.suite,
            "geometry": self.geometry,
            "seed": self.seed,
            "deriv": self.deriv,
            "elapsed_ms": round(self.elapsed_ms, 3),
            "passed": self.passed,
            "checks": [record.to_dict() for record in self.checks],
        }
        if self.skipped:
            data["skipped"] = self.skipped
        return data


def emit_report(reports: List[VerificationReport], fmt: str = "json", out: Optional[str] = None) -> List[Path]:
    """
    Write reports to disk.

    Args:
        reports: Reports to write (nonempty)
        fmt: "json" or "csv"
        out: Output file; defaults to $TWISTOR_OUTPUT_DIR/verify.<fmt>

    Returns:
        Paths written

    Raises:
        InvalidConfig: If there is nothing to write or the format is unknown
        IoFailure: If the file cannot be written
    """
    if not reports:
        raise InvalidConfig("No reports to emit. Run at least one suite before writing output.")
    if fmt not in REPORT_FORMATS:
        raise InvalidConfig(f"Unknown report format: '{fmt}'. Use one of: {', '.join(REPORT_FORMATS)}.")

    path = Path(out) if out else Path(os.environ.get("TWISTOR_OUTPUT_DIR", "reports")) / f"verify.{fmt}"
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            if fmt == "json":
                json.dump([report.to_dict() for report in reports], handle, indent=2)
                handle.write("\n")
            else:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(CSV_COLUMNS)
                for report in reports:
                    for record in report.checks:
                        writer.writerow([
                            report.suite,
                            record.check,
                            record.anchor,
                            repr(record.max_residual),
                            repr(record.tolerance),
                            "true" if record.passed else "false",
                        ])
    except OSError as exc:
        raise IoFailure(
            f"Could not write report to {path}: {exc}\n"
            "Check that the directory is writable or set TWISTOR_OUTPUT_DIR."
        ) from exc
    return [path]


def summary_table(reports: Iterable[VerificationReport], quiet: bool = False) -> str:
    reports = list(reports)
    lines = []
    for report in reports:
        mark = "✅" if report.passed else "❌"
        header = f"{mark} {report.suite} on {report.geometry} ({report.elapsed_ms:.0f} ms)"
        if report.skipped:
            header += f" skipped: {report.skipped}"
        lines.append(header)
        if quiet:
            continue
        for record in report.checks:
            check_mark = "✅" if record.passed else "❌"
            line = f"   {check_mark} {record.check:<20} {record.max_residual:.3e} < {record.tolerance:.1e}"
            if record.note:
                line += f"  [{record.note}]"
            lines.append(line)
    if not any(report.checks for report in reports):
        lines.append("⚠️  No checks executed: every requested suite was skipped")
    return "\n".join(lines)


def print_summary(reports: Iterable[VerificationReport], quiet: bool = False) -> None:
    print(f"\n{'='*60}")
    print(summary_table(reports, quiet=quiet))
    print(f"{'='*60}\n")
