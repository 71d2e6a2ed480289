import logging
import os
import time

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import questionary
import typer
import yaml
from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler

from lattice_embed.demos import demo_config, demo_names
from lattice_embed.errors import ConfigValidationError, LatticeEmbedError
from lattice_embed.models import RunConfig, config_from_dict, load_config_from_yaml, validate_config
from lattice_embed.optimizer import EmbeddingState, OptimizationReport, optimize
from lattice_embed.report_generator import OutputPaths, ReportGenerator

logger = logging.getLogger("lattice_embed")

OUTPUT_DIR_ENV = "LATTICE_EMBED_OUTPUT_DIR"

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_FAILED = 3

app = typer.Typer(
    help="Embed integer lattices onto smooth manifolds by minimizing an alignment functional.",
    add_completion=False,
    no_args_is_help=True,
)


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)],
        force=True,
    )


@dataclass
class RunOutcome:
    state: EmbeddingState
    report: OptimizationReport
    paths: OutputPaths
    seconds: float


class LatticeEmbedder:
    """Main orchestrator: config in, embedding and artifacts out"""

    def __init__(self, threads: int = 1, console: Optional[Console] = None):
        if threads < 1:
            raise ValueError(f"threads must be at least 1, got {threads}")
        self.threads = threads
        self.report_generator = ReportGenerator(console)

    def output_directory(self, config: RunConfig) -> Path:
        # the environment wins over the config file
        return Path(os.environ.get(OUTPUT_DIR_ENV) or config.output.directory)

    def embed(self, config: RunConfig, output_dir: Optional[Path] = None) -> RunOutcome:
        lattice = config.build_lattice()
        manifold = config.build_manifold()
        fields = config.build_fields(manifold)
        logger.info(
            "Embedding %d lattice points in R^%d onto %s",
            len(lattice), lattice.dimension, config.manifold.kind,
        )

        started = time.perf_counter()
        state, report = optimize(
            lattice,
            manifold,
            fields,
            config.objective.to_params(),
            stop=config.stop_criteria(),
            control=config.step_control(),
            workers=self.threads,
            init_jitter=config.optimizer.init_jitter,
            seed=config.optimizer.seed,
        )
        seconds = time.perf_counter() - started
        logger.info("Optimization finished in %.2fs: %s", seconds, report.termination.value)

        self.report_generator.generate_console_report(report, lattice)
        paths = self.report_generator.save_all(
            state,
            report,
            output_dir or self.output_directory(config),
            config.output.prefix,
            list(config.output.formats),
            config=config.model_dump(mode="json", by_alias=True),
        )
        return RunOutcome(state=state, report=report, paths=paths, seconds=seconds)


def _print_diagnostics(console: Console, diagnostics: List) -> None:
    console.print(f"[bold red]{len(diagnostics)} configuration problem(s):[/bold red]")
    for diagnostic in diagnostics:
        console.print(f"[red]•[/red] {diagnostic}")


def _execute(config: RunConfig, threads: int, console: Console, output_dir: Optional[Path] = None) -> int:
    embedder = LatticeEmbedder(threads=threads, console=console)
    try:
        outcome = embedder.embed(config, output_dir)
    except LatticeEmbedError as e:
        logger.error("Run aborted: %s", e)
        return EXIT_FAILED

    console.print(f"\n[bold]Points:[/bold] {outcome.paths.points}")
    console.print(f"[bold]Edges:[/bold] {outcome.paths.edges}")
    for path in outcome.paths.reports:
        console.print(f"[bold]Report:[/bold] {path}")
    if not outcome.report.converged:
        console.print(f"[yellow]Did not converge ({outcome.report.termination.value})[/yellow]")
        return EXIT_FAILED
    console.print("[bold green]Converged.[/bold green]")
    return EXIT_OK


@app.command()
def run(
    config_path: Path = typer.Argument(..., metavar="CONFIG", help="Path to a run config YAML file"),
    threads: int = typer.Option(1, "--threads", min=1, help="Worker threads for per-point work"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log every iteration"),
) -> None:
    """Run an embedding described by a config file."""
    setup_logging(verbose)
    console = Console()
    try:
        config = load_config_from_yaml(config_path)
    except OSError as e:
        console.print(f"[red]Cannot read {config_path}: {e}[/red]")
        raise typer.Exit(EXIT_INVALID_CONFIG)
    except ConfigValidationError as e:
        _print_diagnostics(console, e.diagnostics)
        raise typer.Exit(EXIT_INVALID_CONFIG)
    raise typer.Exit(_execute(config, threads, console))


@app.command()
def validate(
    config_path: Path = typer.Argument(..., metavar="CONFIG", help="Path to a run config YAML file"),
) -> None:
    """Check a config file without running it."""
    console = Console()
    try:
        diagnostics = validate_config(config_path)
    except OSError as e:
        console.print(f"[red]Cannot read {config_path}: {e}[/red]")
        raise typer.Exit(EXIT_INVALID_CONFIG)
    if diagnostics:
        _print_diagnostics(console, diagnostics)
        raise typer.Exit(EXIT_INVALID_CONFIG)
    console.print(f"[green]{config_path} is valid.[/green]")


@app.command()
def demo(
    name: Optional[str] = typer.Argument(None, help=f"One of: {', '.join(demo_names())}"),
    output: Optional[Path] = typer.Option(None, "--output", help="Directory for the run artifacts"),
    save_config: Optional[Path] = typer.Option(
        None, "--save-config", help="Write the demo config to this YAML file instead of running it"
    ),
    threads: int = typer.Option(1, "--threads", min=1),
    verbose: bool = typer.Option(False, "--verbose", "-v"),
) -> None:
    """Run one of the built-in examples, or write its config for editing."""
    setup_logging(verbose)
    console = Console()

    if not name:
        console.print("[bold yellow]Select Demo[/bold yellow]")
        name = questionary.select(
            "Choose a demo:",
            choices=demo_names(),
            style=questionary.Style([
                ('qmark', 'fg:cyan bold'),
                ('pointer', 'fg:cyan bold'),
                ('highlighted', 'fg:cyan bold'),
            ])
        ).ask()
        if not name:
            console.print("[red]No demo selected. Exiting.[/red]")
            raise typer.Exit(EXIT_INVALID_CONFIG)

    try:
        raw = demo_config(name)
    except KeyError as e:
        console.print(f"[red]{e.args[0]}[/red]")
        raise typer.Exit(EXIT_INVALID_CONFIG)

    if save_config is not None:
        save_config.parent.mkdir(parents=True, exist_ok=True)
        save_config.write_text(yaml.safe_dump(raw, sort_keys=False), encoding="utf-8")
        console.print(f"[green]Wrote the {name} demo config to {save_config}[/green]")
        raise typer.Exit(EXIT_OK)
    raise typer.Exit(_execute(config_from_dict(raw), threads, console, output))


def main():
    """Main entry point"""
    load_dotenv()
    app()


if __name__ == "__main__":
    main()
