"""Deterministic reports: rows of (check, op, residual, threshold, verdict, location).

Numbers are flushed to 0 below 1e-13 and rounded to 3 significant figures
before rendering, so the text and JSON forms carry the same payload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__

FLUSH = 1e-13


def rounded(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    x = float(x)
    if x != x:
        return x
    if abs(x) < FLUSH:
        return 0.0
    return float(f"{x:.3g}")


def fmt(x) -> str:
    x = rounded(x)
    if x is None:
        return "-"
    if x == 0:
        return "0"
    return f"{x:.3g}"


def fmt_point(pt) -> str:
    if pt is None or len(pt) == 0:
        return ""
    return "(" + ", ".join(fmt(v) for v in pt) + ")"


PASS, FAIL, INFO = "pass", "FAIL", "-"


@dataclass
class Row:
    check: str
    op: str
    residual: float | None
    threshold: float | None = None
    verdict: str = INFO
    location: str = ""
    enforced: bool = False

    @classmethod
    def test(cls, check, op, residual, threshold, location="", enforced=True) -> "Row":
        """Pass/fail row; the verdict is recomputed from the rounded residual."""
        ok = rounded(residual) < threshold
        return cls(check, op, residual, threshold, PASS if ok else FAIL, location, enforced)

    @classmethod
    def info(cls, check, op, value, location="", verdict=INFO) -> "Row":
        return cls(check, op, value, None, verdict, location, False)

    @property
    def failed(self) -> bool:
        return self.enforced and self.verdict == FAIL

    def payload(self) -> dict:
        return {
            "check": self.check,
            "op": self.op,
            "residual": rounded(self.residual),
            "threshold": rounded(self.threshold),
            "verdict": self.verdict,
            "location": self.location,
            "enforced": self.enforced,
        }


@dataclass
class Report:
    command: str
    spec_name: str
    digest: str
    header: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    exit_code: int = 0

    def add(self, *rows):
        self.rows.extend(rows)

    @property
    def failed(self) -> bool:
        return any(r.failed for r in self.rows)

    def payload(self) -> dict:
        return {
            "tool": "metallic-geom",
            "version": __version__,
            "command": self.command,
            "spec": self.spec_name,
            "spec_sha256": self.digest,
            "header": {k: (rounded(v) if isinstance(v, float) else v) for k, v in self.header.items()},
            "rows": [r.payload() for r in self.rows],
            "exit": self.exit_code,
        }

    def to_json(self) -> str:
        return json.dumps(self.payload(), indent=2, sort_keys=False, ensure_ascii=False) + "\n"

    def to_text(self) -> str:
        p = self.payload()
        lines = [f"metallic-geom {p['version']} {p['command']}  spec {p['spec']}  sha256 {self.digest[:16]}"]
        if p["header"]:
            lines.append("  ".join(f"{k}={_cell(v)}" for k, v in p["header"].items()))
        cols = ("check", "op", "residual", "threshold", "verdict", "location")
        table = [cols] + [
            (r["check"], r["op"], _cell(r["residual"]), _cell(r["threshold"]), _verdict_cell(r), r["location"])
            for r in p["rows"]
        ]
        widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
        for row in table:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if any(not r["enforced"] and r["threshold"] is not None for r in p["rows"]):
            lines.append("* measured only; does not affect the exit code")
        lines.append(f"exit {p['exit']}")
        return "\n".join(lines) + "\n"

    def render(self, output: str = "text") -> str:
        return self.to_json() if output == "json" else self.to_text()


def _verdict_cell(r: dict) -> str:
    if not r["enforced"] and r["threshold"] is not None:
        return r["verdict"].lower() + "*"
    return r["verdict"]


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    return str(v)
