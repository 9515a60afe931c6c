"""Tabulated summaries of run records and their invariant verdicts."""
from __future__ import annotations

from dataclasses import dataclass

COLUMNS = ("scenario", "check", "tolerance", "measured", "verdict")

__all__ = ["ReportSummary", "emit_report"]


@dataclass(frozen=True)
class ReportSummary:
    text: str
    data: dict


def emit_report(records) -> ReportSummary:
    """Summarize one or more run records as a fixed-order table.

    Reporting only: a failing verdict is flagged in the table but raises
    nothing here; acting on failures is the caller's decision.
    """
    records = list(records)
    if not records:
        raise ValueError("need at least one record to report on")
    rows = []
    for record in records:
        scenario = record.get("config", {}).get("scenario", "?")
        for verdict in record.get("verdicts", []):
            rows.append(
                {
                    "scenario": scenario,
                    "check": verdict["name"],
                    "tolerance": float(verdict["tolerance"]),
                    "measured": float(verdict["measured"]),
                    "verdict": "PASS" if verdict["passed"] else "FAIL",
                }
            )
    passes = sum(1 for row in rows if row["verdict"] == "PASS")
    failures = len(rows) - passes

    rendered = [
        (
            row["scenario"],
            row["check"],
            f"{row['tolerance']:.3e}",
            f"{row['measured']:.3e}",
            row["verdict"],
        )
        for row in rows
    ]
    widths = [
        max(len(COLUMNS[i]), *(len(row[i]) for row in rendered)) if rendered else len(COLUMNS[i])
        for i in range(len(COLUMNS))
    ]
    lines = [
        "  ".join(name.ljust(widths[i]) for i, name in enumerate(COLUMNS)),
        "  ".join("-" * widths[i] for i in range(len(COLUMNS))),
    ]
    for row in rendered:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    lines.append(f"{passes} passed, {failures} failed")

    return ReportSummary(
        text="\n".join(lines),
        data={
            "columns": list(COLUMNS),
            "rows": rows,
            "counts": {"pass": passes, "fail": failures},
        },
    )
