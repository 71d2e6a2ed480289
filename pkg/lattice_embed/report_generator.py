import csv
import logging
import math

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import yaml

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from lattice_embed.lattice import Lattice
from lattice_embed.objective import BREAKDOWN_COLUMNS
from lattice_embed.optimizer import EmbeddingState, OptimizationReport

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"


def _fmt(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


@dataclass
class OutputPaths:
    points: Path
    edges: Path
    reports: List[Path] = field(default_factory=list)


def points_header(dimension: int) -> List[str]:
    header = [f"q_{i}" for i in range(dimension)]
    header += [f"init_{i}" for i in range(dimension)]
    header += [f"final_{i}" for i in range(dimension)]
    return header + list(BREAKDOWN_COLUMNS)


def write_points_csv(path: Path, state: EmbeddingState, report: OptimizationReport) -> Path:
    """One row per lattice point: coordinates, start, end and objective contributions"""
    n = state.lattice.dimension
    initial = report.initial_positions if report.initial_positions is not None else state.lattice.embedded()
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(points_header(n))
        for i, (point, final) in enumerate(state.items()):
            row = [str(c) for c in point.coords]
            row += [_fmt(v) for v in initial[i]]
            row += [_fmt(v) for v in final]
            breakdown = report.breakdowns[i].as_dict()
            row += [_fmt(breakdown[name]) for name in BREAKDOWN_COLUMNS]
            writer.writerow(row)
    return path


def read_points_csv(path: Path) -> Dict[str, np.ndarray]:
    """Column name -> values; used by tests and downstream tooling"""
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        return {}
    return {name: np.array([float(r[name]) for r in rows]) for name in rows[0]}


def write_edges_csv(path: Path, lattice: Lattice) -> Path:
    """Grid-adjacent pairs as row indices into the points file"""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["source", "target"])
        for i, j in lattice.adjacent_pairs():
            writer.writerow([i, j])
    return path


def report_to_dict(report: OptimizationReport, config: Optional[dict] = None) -> dict:
    data = {
        "termination": report.termination.value,
        "iterations": report.iterations,
        "gradient_sup_norm": float(report.gradient_sup_norm),
        "objective_trace": [float(v) for v in report.objective_trace],
        "breakdown": {k: float(v) for k, v in report.total.as_dict().items()},
        "flagged_points": [list(p.coords) for p in report.flagged_points],
        "failed_points": [list(p.coords) for p in report.failed_points],
        "min_pairwise_distance": float(report.min_pairwise_distance),
        "gradient_exact": report.gradient_exact,
    }
    if config is not None:
        data["config"] = config
    return data


class ReportGenerator:
    """Writes run artifacts and prints the console summary"""

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def generate_console_report(self, report: OptimizationReport, lattice: Lattice) -> None:
        color = "green" if report.converged else "yellow"
        self.console.print()
        self.console.print(Panel.fit(
            f"[bold blue]Lattice Embedding Report[/bold blue]\n"
            f"[white]Points: {len(lattice)} in R^{lattice.dimension}[/white]\n"
            f"[{color}]Termination: {report.termination.value} after {report.iterations} iterations[/{color}]\n"
            f"[white]Gradient sup-norm: {report.gradient_sup_norm:.3e}[/white]",
            border_style="blue"
        ))

        table = Table(title="Objective Breakdown", show_header=True, header_style="bold magenta")
        table.add_column("Term", style="cyan", no_wrap=True)
        table.add_column("Value", style="green", justify="right")
        for name, value in report.total.as_dict().items():
            table.add_row(name.replace("_", " "), f"{value:.6g}")
        self.console.print(table)

        if report.objective_trace:
            self.console.print(
                f"Objective: {report.objective_trace[0]:.6g} -> {report.objective_trace[-1]:.6g}"
            )
        if math.isfinite(report.min_pairwise_distance):
            self.console.print(f"Minimum pairwise distance: {report.min_pairwise_distance:.6g}")
        if report.flagged_points:
            self.console.print(f"\n[bold red]{len(report.flagged_points)} points started on the medial axis[/bold red]")
            for point in report.flagged_points:
                self.console.print(f"[red]•[/red] {point.coords}")
        if report.failed_points:
            self.console.print(f"\n[bold red]No footpoint for {len(report.failed_points)} points[/bold red]")
            for point in report.failed_points:
                self.console.print(f"[red]•[/red] {point.coords}")
        if not report.gradient_exact:
            self.console.print("[yellow]alpha != beta: reported gradient ignores footpoint motion[/yellow]")

    def generate_markdown_report(self, report: OptimizationReport, lattice: Lattice) -> str:
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")

        text = f"""# Lattice Embedding Report

**Generated:** {timestamp}
**Points:** {len(lattice)} in R^{lattice.dimension}
**Termination:** {report.termination.value} after {report.iterations} iterations
**Gradient sup-norm:** {report.gradient_sup_norm:.6g}

## Objective Breakdown

| Term | Value |
|------|-------|
"""
        for name, value in report.total.as_dict().items():
            text += f"| {name} | {value:.10g} |\n"

        text += "\n## Objective Trace\n\n"
        if report.objective_trace:
            text += f"- start: {report.objective_trace[0]:.10g}\n"
            text += f"- end: {report.objective_trace[-1]:.10g}\n"
            text += f"- recorded values: {len(report.objective_trace)}\n"

        text += "\n## Flagged Points\n\n"
        if report.flagged_points:
            for point in report.flagged_points:
                text += f"- {point.coords}\n"
        else:
            text += "- none\n"

        if report.failed_points:
            text += "\n## Failed Points\n\n"
            for point in report.failed_points:
                text += f"- {point.coords}\n"

        text += f"\n**Minimum pairwise distance:** {report.min_pairwise_distance:.6g}  \n"
        text += f"**Exact gradient:** {'yes' if report.gradient_exact else 'no'}\n"
        return text

    def save_report(self, report: OptimizationReport, lattice: Lattice, output_path: Path,
                    format: str = "yaml", config: Optional[dict] = None) -> Path:
        """Save the run summary; output_path is given without suffix"""
        if format.lower() == "yaml":
            output_path = output_path.with_suffix(".yaml")
            content = yaml.safe_dump(report_to_dict(report, config), sort_keys=False)
        elif format.lower() == "markdown":
            output_path = output_path.with_suffix(".md")
            content = self.generate_markdown_report(report, lattice)
        else:
            raise ValueError(f"Unsupported format: {format}")

        with open(output_path, "w", encoding="utf-8") as f:
            f.write(content)
        logger.info("Report saved to: %s", output_path)
        return output_path

    def save_all(self, state: EmbeddingState, report: OptimizationReport, output_dir: Path,
                 prefix: str, formats: List[str], config: Optional[dict] = None) -> OutputPaths:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        paths = OutputPaths(
            points=write_points_csv(output_dir / f"{prefix}_points.csv", state, report),
            edges=write_edges_csv(output_dir / f"{prefix}_edges.csv", state.lattice),
        )
        for fmt in formats:
            paths.reports.append(
                self.save_report(report, state.lattice, output_dir / f"{prefix}_report", fmt, config)
            )
        return paths
