"""Benchmark reports: one table of rows plus run metadata and context notes.

Reports are plain data, a pure function of (fixtures, config, seed): JSON in
and out byte-stable, with a fixed-width text rendering for terminals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

REPORT_SCHEMA_VERSION = "1"


def _format_cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}".rstrip("0").rstrip(".")
    return str(value)


def render_table(columns: tuple, rows: tuple) -> str:
    """Fixed-width table; missing cells render as '-'."""
    headers = [str(c) for c in columns]
    grid = [[_format_cell(row.get(c)) for c in columns] for row in rows]
    widths = [max(len(headers[i]), *(len(r[i]) for r in grid)) if grid
              else len(headers[i]) for i in range(len(headers))]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(r) for r in grid)
    return "\n".join(out)


@dataclass(frozen=True)
class BenchReport:
    """A benchmark outcome: named table, metadata, optional context footer.

    Every row carries its own sample count under ``n``; aggregate cells
    without a count are not allowed into reports.
    """

    kind: str
    columns: tuple
    rows: tuple
    metadata: dict = field(default_factory=dict)
    footer: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(dict(r) for r in self.rows))
        object.__setattr__(self, "footer", tuple(self.footer))
        for row in self.rows:
            if "n" not in row:
                raise ValueError(f"report row missing sample count 'n': {row}")

    def to_json(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": self.kind,
            "columns": list(self.columns),
            "rows": [dict(r) for r in self.rows],
            "metadata": self.metadata,
            "footer": list(self.footer),
        }

    @staticmethod
    def from_json(obj: dict) -> "BenchReport":
        return BenchReport(obj["kind"], tuple(obj["columns"]),
                           tuple(obj["rows"]), obj.get("metadata", {}),
                           tuple(obj.get("footer", ())))

    def to_text(self) -> str:
        lines = [f"[{self.kind}]"]
        meta = ", ".join(f"{k}={v}" for k, v in sorted(self.metadata.items()))
        if meta:
            lines.append(meta)
        lines.append("")
        lines.append(render_table(self.columns, self.rows))
        if self.footer:
            lines.append("")
            lines.extend(self.footer)
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path: str | Path) -> "BenchReport":
        return BenchReport.from_json(json.loads(Path(path).read_text()))
