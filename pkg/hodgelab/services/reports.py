"""Command reports: inputs, results and pass/fail certificates."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from rich.console import Console
from rich.table import Table

from hodgelab.core.exactmath import FieldElement
from hodgelab.utils.rationals import format_rational


@dataclass(frozen=True)
class Certificate:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    command: str
    inputs: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)
    certificates: list[Certificate] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)

    def certify(self, name: str, passed: bool, detail: str = "") -> bool:
        self.certificates.append(Certificate(name, bool(passed), detail))
        return bool(passed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "inputs": plain(self.inputs),
            "results": plain(self.results),
            "certificates": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.certificates
            ],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def plain(value: Any) -> Any:
    """JSON-ready copy: rationals as "p/q", field elements as polynomials in g."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, int):
        return value
    if isinstance(value, FieldElement):
        return str(value)
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return str(value)


def _cell(value: Any) -> str:
    value = plain(value)
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list):
        return "(" + ", ".join(_cell(v) for v in value) + ")"
    if isinstance(value, dict):
        return "; ".join(f"{k}: {_cell(v)}" for k, v in value.items())
    if value is None:
        return "-"
    return str(value)


def _table(title: str, rows: dict[str, Any]) -> Table:
    table = Table(title=title, title_justify="left", show_header=False)
    table.add_column("key", style="bold")
    table.add_column("value", overflow="fold")
    for key, value in rows.items():
        table.add_row(key, _cell(value))
    return table


def render_text(report: Report, console: Console | None = None) -> None:
    console = console or Console()
    console.print(f"[bold]hodgelab {report.command}[/bold]", highlight=False)
    if report.inputs:
        console.print(_table("Inputs", report.inputs))
    if report.results:
        console.print(_table("Results", report.results))
    if report.certificates:
        table = Table(title="Certificates", title_justify="left")
        table.add_column("check")
        table.add_column("status")
        table.add_column("detail", overflow="fold")
        for c in report.certificates:
            status = "[green]PASS[/green]" if c.passed else "[red]FAIL[/red]"
            table.add_row(c.name, status, c.detail)
        console.print(table)
    verdict = "[green]all certificates pass[/green]" if report.passed else "[red]certificate failure[/red]"
    console.print(verdict)
