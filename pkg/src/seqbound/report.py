"""Pass/fail verification records and deterministic CSV emission.

All numeric output uses 12 significant digits, '.' as the decimal separator,
and LF line endings, so byte-identical reruns are a meaningful check.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SIGNIFICANT_DIGITS = 12

VERIFICATION_HEADER = ("check", "k", "j", "observed", "bound", "slack", "pass")


def format_number(value) -> str:
    """Deterministic text for one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return ""
    return f"{x:.{SIGNIFICANT_DIGITS}g}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(v) for v in row])


@dataclass(frozen=True)
class CheckRow:
    """One verified inequality: observed <= bound, slack = bound - observed."""

    check: str
    k: int | None
    j: int | None
    observed: float
    bound: float
    slack: float
    passed: bool

    def as_csv_row(self) -> tuple:
        return (self.check, self.k, self.j, self.observed, self.bound, self.slack, self.passed)


def make_check(check: str, observed: float, bound: float, k: int | None = None,
               j: int | None = None, tolerance: float = 0.0) -> CheckRow:
    observed = float(observed)
    bound = float(bound)
    return CheckRow(
        check=check,
        k=k,
        j=j,
        observed=observed,
        bound=bound,
        slack=bound - observed,
        passed=observed <= bound + tolerance,
    )


@dataclass(frozen=True, eq=False)
class VerificationReport:
    rows: tuple[CheckRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def worst_slack(self) -> float:
        return min((row.slack for row in self.rows), default=math.inf)

    def failures(self) -> tuple[CheckRow, ...]:
        return tuple(row for row in self.rows if not row.passed)

    def to_csv(self, path) -> None:
        write_csv(path, VERIFICATION_HEADER, (row.as_csv_row() for row in self.rows))


def merge_reports(reports: Iterable[VerificationReport]) -> VerificationReport:
    rows: list[CheckRow] = []
    for report in reports:
        rows.extend(report.rows)
    return VerificationReport(tuple(rows))
