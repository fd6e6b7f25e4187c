"""Check reports and their CSV / plain-text serialisations."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

CSV_COLUMNS = ("check_name", "scenario", "samples", "tolerance", "max_abs_residual", "mean_abs_residual", "pass")


@dataclass(frozen=True)
class CheckReport:
    """Residual statistics of one check; ``passed`` iff ``max_abs_residual <= tolerance``.

    Composite checks keep their sub-reports in ``parts``.
    """

    check_name: str
    max_abs_residual: float
    mean_abs_residual: float
    samples_evaluated: int
    tolerance: float
    passed: bool
    notes: str = ""
    scenario: str = ""
    tier: str = "analytic"
    parts: tuple = field(default=(), repr=False)

    @classmethod
    def from_residuals(cls, name: str, residuals: Sequence[float], tolerance: float, notes: str = "",
                       tier: str = "analytic", scenario: str = "") -> "CheckReport":
        vals = [float(r) for r in residuals]
        if not vals:
            return cls(name, 0.0, 0.0, 0, tolerance, True, notes, scenario, tier)
        if any(math.isnan(v) for v in vals):
            worst = math.inf
        else:
            worst = max(vals)
        mean = math.fsum(vals) / len(vals)
        return cls(name, worst, mean, len(vals), tolerance, worst <= tolerance, notes, scenario, tier)

    @classmethod
    def combine(cls, name: str, parts: Sequence["CheckReport"], notes: str = "") -> "CheckReport":
        """All-of composite: worst residual and loosest tolerance over the parts.

        ``passed`` still requires every part to pass at its own tolerance.
        """
        parts = tuple(parts)
        worst = max(p.max_abs_residual for p in parts)
        mean = max(p.mean_abs_residual for p in parts)
        tol = max(p.tolerance for p in parts)
        samples = sum(p.samples_evaluated for p in parts)
        ok = all(p.passed for p in parts)
        return cls(name, worst, mean, samples, tol, ok, notes, parts[0].scenario, parts[0].tier, parts)

    def with_scenario(self, scenario: str) -> "CheckReport":
        return replace(self, scenario=scenario, parts=tuple(p.with_scenario(scenario) for p in self.parts))

    def flatten(self) -> list["CheckReport"]:
        if not self.parts:
            return [self]
        out = []
        for p in self.parts:
            out.extend(p.flatten())
        return out


def _fmt(x: float) -> str:
    return repr(float(x))


def csv_text(reports: Iterable[CheckReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow([r.check_name, r.scenario, r.samples_evaluated, _fmt(r.tolerance),
                         _fmt(r.max_abs_residual), _fmt(r.mean_abs_residual), "true" if r.passed else "false"])
    return buf.getvalue()


def plain_text(reports: Iterable[CheckReport]) -> str:
    rows = [("check", "scenario", "n", "tol", "max|res|", "mean|res|", "pass", "notes")]
    for r in reports:
        rows.append((r.check_name, r.scenario, str(r.samples_evaluated), f"{r.tolerance:.1e}",
                     f"{r.max_abs_residual:.3e}", f"{r.mean_abs_residual:.3e}", "PASS" if r.passed else "FAIL",
                     r.notes))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"
