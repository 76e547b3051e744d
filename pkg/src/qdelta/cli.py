"""qd: command-line front end for the pipeline."""
from __future__ import annotations

import logging
from pathlib import Path

import click

from . import pipeline as pl
from .config import STAGES, PipelineConfig, load_config
from .metrics import compute_all_metrics, parse_entities
from .metrics.catalog import CLASS_METRICS, METHOD_METRICS
from .mining.discovery import discover_repositories


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Key-value configuration file.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory for artifacts.")
@click.option("--seed", type=int, default=None, help="Random seed for clustering.")
@click.option("--offline", is_flag=True, default=False,
              help="Never call the remote model; use the rule-based summarizer.")
@click.option("-v", "--verbose", is_flag=True, default=False)
@click.pass_context
def main(ctx, config_path, out_dir, seed, offline, verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {}
    if out_dir is not None:
        overrides["out_dir"] = Path(out_dir)
    if seed is not None:
        overrides["seed"] = seed
    if offline:
        overrides["offline"] = True
    ctx.obj = load_config(config_path, **overrides)


def _config(ctx) -> PipelineConfig:
    return ctx.obj


@main.command()
@click.option("--min-stars", type=int, default=None)
@click.option("--min-forks", type=int, default=None)
@click.option("--query", "query_terms", multiple=True)
@click.option("--limit", type=int, default=None)
@click.pass_context
def discover(ctx, min_stars, min_forks, query_terms, limit):
    """Search the code-hosting API for candidate repositories."""
    config = _config(ctx)
    repos = discover_repositories(
        min_stars if min_stars is not None else config.min_stars,
        min_forks if min_forks is not None else config.min_forks,
        list(query_terms) or config.query_terms,
        limit if limit is not None else config.limit,
    )
    for repo in repos:
        click.echo(f"{repo.full_name}\t{repo.stars}\t{repo.forks}\t{repo.clone_url}")


@main.command()
@click.option("--repo", "repos", multiple=True, type=click.Path(exists=True),
              help="Local clone path; may repeat. Defaults to config repos.")
@click.option("--extension", default=None)
@click.pass_context
def mine(ctx, repos, extension):
    """Extract per-commit, per-file change records from local clones."""
    config = _config(ctx)
    if repos:
        config.repos = list(repos)
    if extension:
        config.extension = extension
    config.out_dir.mkdir(parents=True, exist_ok=True)
    stats = pl.stage_mine(config)
    click.echo(
        f"commits seen: {stats.commits_seen}  records: {stats.records_emitted}"
        f"  skipped: {stats.files_skipped}"
    )


@main.command()
@click.option("--blob-threshold-bytes", type=int, default=None)
@click.pass_context
def split(ctx, blob_threshold_bytes):
    """Split commit records into isolated modifications."""
    config = _config(ctx)
    if blob_threshold_bytes is not None:
        config.blob_threshold_bytes = blob_threshold_bytes
    config.out_dir.mkdir(parents=True, exist_ok=True)
    count = pl.stage_split(config)
    click.echo(f"modifications: {count}")


@main.command()
@click.pass_context
def analyze(ctx):
    """Compute impact vectors and drop zero-impact modifications."""
    config = _config(ctx)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    count = pl.stage_analyze(config)
    click.echo(f"retained impact vectors: {count}")


@main.command()
@click.pass_context
def summarize(ctx):
    """Generate detailed and simplified summaries per modification."""
    config = _config(ctx)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    count = pl.stage_summarize(config)
    click.echo(f"summaries: {count}")


@main.command()
@click.option("--k-min", type=int, default=None)
@click.option("--k-max", type=int, default=None)
@click.option("--restarts", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--standardize", is_flag=True, default=False)
@click.pass_context
def cluster(ctx, k_min, k_max, restarts, seed, standardize):
    """K-means over impact vectors with silhouette-selected k."""
    config = _config(ctx)
    if k_min is not None:
        config.k_min = k_min
    if k_max is not None:
        config.k_max = k_max
    if restarts is not None:
        config.restarts = restarts
    if seed is not None:
        config.seed = seed
    if standardize:
        config.standardize = True
    config.out_dir.mkdir(parents=True, exist_ok=True)
    result = pl.stage_cluster(config)
    click.echo(
        f"k={result.k} mean silhouette={result.mean_silhouette:.4f}"
        f" retained={sorted(result.retained)}"
    )


@main.command()
@click.pass_context
def report(ctx):
    """Render cluster reports and distribution tables."""
    config = _config(ctx)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    rendered = pl.stage_report(config)
    click.echo(f"reported clusters: {rendered}")


@main.command()
@click.option("--stages", default=None,
              help=f"Comma-separated subset of: {','.join(STAGES)}")
@click.option("--seed", type=int, default=None)
@click.option("--offline", is_flag=True, default=False)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.pass_context
def run(ctx, stages, seed, offline, out_dir):
    """Run the enabled pipeline stages in order."""
    config = _config(ctx)
    if stages is not None:
        config.stages = [s.strip() for s in stages.split(",") if s.strip()]
        config.validate()
    if seed is not None:
        config.seed = seed
    if offline:
        config.offline = True
    if out_dir is not None:
        config.out_dir = Path(out_dir)
    results = pl.run_pipeline(config)
    click.echo(f"completed stages: {', '.join(results)}")


@main.command()
@click.argument("file", type=click.Path(exists=True))
def metrics(file):
    """Print the per-entity metric table for one source file (TSV)."""
    tree = parse_entities(Path(file).read_text(encoding="utf-8"))
    if tree.errors:
        for err in tree.errors:
            click.echo(f"# parse error: {err}", err=True)
    table = compute_all_metrics(tree)
    click.echo("entity\tkind\t" + "\t".join(dict.fromkeys(METHOD_METRICS + CLASS_METRICS)))
    columns = list(dict.fromkeys(METHOD_METRICS + CLASS_METRICS))
    for key in sorted(table):
        em = table[key]
        cells = [
            (f"{em.values[c]:.6g}" if c in em.values else "-") for c in columns
        ]
        click.echo(f"{key}\t{em.entity_kind}\t" + "\t".join(cells))


if __name__ == "__main__":
    main()
