"""Command line interface for the science mapping pipeline."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Optional

import typer
from rich.console import Console
from rich.table import Table

from . import PUBLISHED_BANDS, __version__
from .config import PipelineConfig, load_config
from .errors import SciencemapError
from .participation import load_published_bands, replay_bands, select_cutoff
from .stages import StageResult, run_pipeline, run_stage, stage_registry
from .synthetic import generate_corpus

app = typer.Typer(
    help="Science mapping pipeline: descriptors, cut-off bands, base maps and overlays"
)
console = Console()
logger = logging.getLogger(__name__)

ConfigOption = typer.Option(None, "--config", "-c", help="Pipeline config file (TOML)")
OutOption = typer.Option(
    None, "--out", "-o", help="Output directory (default: SCIENCEMAP_OUT or ./out)"
)
SeedOption = typer.Option(None, "--seed", help="Seed for every stochastic stage")
CorpusOption = typer.Option(None, "--corpus", help="Corpus CSV")
CategoriesOption = typer.Option(None, "--categories", help="Source category sidecar CSV")
ShowLabelsOption = typer.Option(
    None, "--show-labels/--no-show-labels", help="Write source ids next to map nodes"
)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log stage progress"),
) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@contextmanager
def _exit_on_error() -> Iterator[None]:
    try:
        yield
    except SciencemapError as ex:
        console.print(f"❌ {ex}", style="red")
        raise typer.Exit(code=ex.exit_code) from ex


def _load(
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    **overrides: Any,
) -> PipelineConfig:
    return load_config(config_path, overrides={"out": out, **overrides}, seed=seed)


def _show_result(result: StageResult) -> None:
    console.print(f"✅ {result.stage}: {len(result.outputs)} artifacts", style="green")
    if result.metrics:
        table = Table(title=f"{result.stage} metrics")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", justify="right", style="yellow")
        for key, value in result.metrics.items():
            table.add_row(key, f"{value:g}" if isinstance(value, float) else str(value))
        console.print(table)
    for note in result.notes:
        console.print(f"  • {note}")


def _run(name: str, config: PipelineConfig) -> None:
    with _exit_on_error():
        _show_result(run_stage(config, name))


@app.command("stages")
def list_stages() -> None:
    """List the pipeline stages in run order."""
    table = Table(title="Pipeline stages")
    table.add_column("Stage", style="cyan")
    table.add_column("Needs", style="yellow")
    table.add_column("Description", style="white")
    for name in stage_registry.list_stages():
        stage_class = stage_registry.get_stage(name)
        assert stage_class is not None
        doc = (stage_class.__doc__ or "").strip().splitlines()
        table.add_row(name, ", ".join(stage_class.requires), doc[0] if doc else "")
    console.print(table)


@app.command("version")
def version() -> None:
    """Print the package version."""
    console.print(__version__)


@app.command("run")
def run(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    corpus: Optional[Path] = CorpusOption,
    categories: Optional[Path] = CategoriesOption,
    labels: Optional[Path] = typer.Option(None, "--labels", help="Relatedness labels CSV"),
    term_core: Optional[str] = typer.Option(None, "--term-core", help="Seed term"),
) -> None:
    """Run every stage and write report.json."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            seed,
            corpus=corpus,
            categories=categories,
            labels=labels,
            term_core=term_core,
        )
        report = run_pipeline(settings)

    table = Table(title="Run report")
    table.add_column("Field", style="cyan")
    table.add_column("Value", justify="right", style="yellow")
    for key in (
        "documents",
        "sources",
        "keyword_count",
        "descriptor_count",
        "cutoff",
        "selected_count",
        "mapped_sources",
        "cluster_count",
    ):
        table.add_row(key, str(report[key]))
    table.add_row("permutation_p", f"{report['cohesion']['permutation_p']:.4f}")
    console.print(table)
    console.print(f"📁 Artifacts in {settings.out}")


@app.command("ingest")
def ingest(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    corpus: Optional[Path] = CorpusOption,
    categories: Optional[Path] = CategoriesOption,
) -> None:
    """Parse the corpus and record its summary."""
    with _exit_on_error():
        settings = _load(config, out, None, corpus=corpus, categories=categories)
    _run("ingest", settings)


@app.command("descriptors")
def descriptors(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    term_core: Optional[str] = typer.Option(None, "--term-core", help="Seed term"),
    min_occurrence: Optional[int] = typer.Option(None, "--min-occurrence"),
    top_n: Optional[int] = typer.Option(None, "--top-n", help="Number of primary descriptors"),
    variant_rules: Optional[Path] = typer.Option(
        None, "--variant-rules", help="variant,canonical CSV"
    ),
) -> None:
    """Extract keywords and select primary and secondary descriptors."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            None,
            term_core=term_core,
            variant_rules=variant_rules,
            descriptors={"min_occurrence": min_occurrence, "top_n": top_n},
        )
    _run("descriptors", settings)


def _print_replay(bands_file: Path, min_avg_pp: float) -> None:
    bands, discrepancies = replay_bands(load_published_bands(bands_file))
    table = Table(title="Cut-off bands (replayed)")
    for column in ("Band", "PP >", "Included", "Errors", "Error %", "Avg PP"):
        table.add_column(column, justify="right")
    for band in bands:
        table.add_row(
            str(band.band_index),
            f"{band.threshold_percent:g}",
            str(band.included),
            str(band.errors),
            str(band.error_percent),
            str(band.avg_pp),
        )
    console.print(table)
    for msg in discrepancies:
        console.print(f"⚠️  {msg}", style="yellow")

    cutoff = select_cutoff(bands, min_avg_pp)
    chosen = next(b for b in bands if b.threshold_percent == cutoff)
    console.print(
        f"Cut-off: {cutoff:g}% ({chosen.included} included, "
        f"{chosen.errors} unrelated, {chosen.selected} selected)"
    )


@app.command("participate")
def participate(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    pp_only: bool = typer.Option(
        False, "--pp-only", help="Replay a published band table instead of the corpus"
    ),
    bands_file: Optional[Path] = typer.Option(
        None, "--bands-file", help="Published bands CSV (default: bundled table)"
    ),
) -> None:
    """Compute TNA, NRA and PP per source."""
    with _exit_on_error():
        settings = _load(config, out, None, published_bands=bands_file)
        if pp_only:
            bands_path = (
                settings.require_path("published_bands")
                if settings.published_bands is not None
                else PUBLISHED_BANDS
            )
            _print_replay(bands_path, settings.participation.min_avg_pp)
            return
    _run("participate", settings)


@app.command("bands")
def bands(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    labels: Optional[Path] = typer.Option(None, "--labels", help="Relatedness labels CSV"),
    min_avg_pp: Optional[float] = typer.Option(None, "--min-avg-pp"),
    heuristic_labels: Optional[bool] = typer.Option(
        None, "--heuristic-labels/--no-heuristic-labels", help="Label PP > 0 sources related"
    ),
) -> None:
    """Build cut-off bands, pick the cut-off and list the selected publications."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            None,
            labels=labels,
            participation={"min_avg_pp": min_avg_pp, "heuristic_labels": heuristic_labels},
        )
    _run("bands", settings)


@app.command("simnet")
def simnet(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    citation_weight: Optional[float] = typer.Option(None, "--citation-weight"),
    cocitation_weight: Optional[float] = typer.Option(None, "--cocitation-weight"),
    coupling_weight: Optional[float] = typer.Option(None, "--coupling-weight"),
) -> None:
    """Build the source similarity network."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            None,
            simnet={
                "citation_weight": citation_weight,
                "cocitation_weight": cocitation_weight,
                "coupling_weight": coupling_weight,
            },
        )
    _run("simnet", settings)


@app.command("map")
def map_stage(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    max_iter: Optional[int] = typer.Option(None, "--max-iter"),
    tol: Optional[float] = typer.Option(None, "--tol"),
    force_density: Optional[bool] = typer.Option(
        None, "--force-density/--no-force-density", help="Render density of a non-converged layout"
    ),
    show_labels: Optional[bool] = ShowLabelsOption,
) -> None:
    """Lay out the base map and its density."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            seed,
            mapping={
                "max_iter": max_iter,
                "tol": tol,
                "force_density": force_density,
                "show_labels": show_labels,
            },
        )
    _run("map", settings)


@app.command("cluster")
def cluster(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    resolution: Optional[float] = typer.Option(None, "--resolution", help="Clustering resolution"),
    restarts: Optional[int] = typer.Option(None, "--restarts"),
    show_labels: Optional[bool] = ShowLabelsOption,
) -> None:
    """Cluster the mapped sources."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            seed,
            mapping={"resolution": resolution, "restarts": restarts, "show_labels": show_labels},
        )
    _run("cluster", settings)


@app.command("overlay")
def overlay(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    permutations: Optional[int] = typer.Option(None, "--permutations"),
    core_quantile: Optional[float] = typer.Option(None, "--core-quantile"),
) -> None:
    """Overlay the selected publications on the base map."""
    with _exit_on_error():
        settings = _load(
            config,
            out,
            seed,
            overlay={"permutations": permutations, "core_quantile": core_quantile},
        )
    _run("overlay", settings)


@app.command("categraph")
def categraph(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
    seed: Optional[int] = SeedOption,
    iterations: Optional[int] = typer.Option(None, "--iterations"),
    k: Optional[float] = typer.Option(None, "--k", help="Ideal edge length"),
) -> None:
    """Build and lay out the category co-assignment graph."""
    with _exit_on_error():
        settings = _load(config, out, seed, categraph={"iterations": iterations, "k": k})
    _run("categraph", settings)


@app.command("report")
def report(
    config: Optional[Path] = ConfigOption,
    out: Optional[Path] = OutOption,
) -> None:
    """Summarize fresh stage artifacts into report.json."""
    with _exit_on_error():
        settings = _load(config, out, None)
    _run("report", settings)


@app.command("synth")
def synth(
    out: Path = typer.Option(Path("synthetic"), "--out", "-o", help="Directory for the CSV files"),
    docs: int = typer.Option(5000, "--docs", help="Number of documents"),
    sources: int = typer.Option(500, "--sources", help="Number of sources"),
    seed: int = typer.Option(0, "--seed"),
) -> None:
    """Write a seeded synthetic corpus with categories and labels."""
    try:
        paths = generate_corpus(n_documents=docs, n_sources=sources, seed=seed).write(out)
    except ValueError as ex:
        console.print(f"❌ {ex}", style="red")
        raise typer.Exit(2) from ex
    for name, path in paths.items():
        console.print(f"📄 {name}: {path}")


if __name__ == "__main__":
    app()
