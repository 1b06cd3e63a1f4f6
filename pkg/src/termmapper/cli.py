"""Command-line front door.

Subcommands: ingest (vocabulary files -> store), index (store -> vector
index), map (names or a CSV column -> mapping events), serve (HTTP API),
eval (assess results against annotations).

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Machine-readable output goes to stdout only; progress and stats go to
stderr and are silenced by --quiet.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from .concepts import ConceptStore, ingest_vocabulary
from .config import ServiceConfig, build_backend, build_deps, build_embedder, options_from_dict
from .errors import (
    ConfigError,
    EngineError,
    EvalValidationError,
    InvalidInputError,
    VocabularyFormatError,
)
from .evaluation import evaluate, load_annotations, load_results, top5_comparison
from .pipeline import NameResult, PipelineDeps, run_batch
from .vectors import DEFAULT_DIMENSION, DEFAULT_SEED, VectorIndex

_USAGE_ERRORS = (VocabularyFormatError, EvalValidationError, ConfigError, InvalidInputError)


def _fail(exc: EngineError) -> None:
    if isinstance(exc, _USAGE_ERRORS):
        raise click.UsageError(str(exc))
    raise click.ClickException(str(exc))


def _note(quiet: bool, message: str) -> None:
    if not quiet:
        click.echo(message, err=True)


@click.group()
@click.version_option(package_name="termmapper")
def main() -> None:
    """Map informal medical terms to standard vocabulary concepts."""


@main.command("ingest")
@click.option("--concepts", "concept_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--synonyms", "synonym_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--ancestors", "ancestor_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--relationships", "relationship_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--store", "store_path", required=True, type=click.Path(dir_okay=False))
@click.option("--force", is_flag=True, help="Overwrite an existing store file.")
@click.option("--quiet", is_flag=True)
def cmd_ingest(concept_file, synonym_file, ancestor_file, relationship_file, store_path, force, quiet):
    """Load tab-separated vocabulary files into a store file."""
    if Path(store_path).exists() and not force:
        raise click.UsageError(f"store {store_path} already exists; pass --force to overwrite")
    try:
        stats = ingest_vocabulary(
            concept_file,
            synonym_file,
            ancestor_file,
            relationship_file,
            store_path=store_path,
        )
    except EngineError as exc:
        _fail(exc)
    _note(
        quiet,
        f"ingested concepts={stats.concepts} synonyms={stats.synonyms} "
        f"ancestors={stats.ancestors} relationships={stats.relationships} "
        f"skipped={stats.skipped}",
    )


@main.command("index")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--provider", type=click.Choice(["test", "remote"]), default="test", show_default=True)
@click.option("--endpoint", help="Embedding endpoint URL (remote provider).")
@click.option("--dimension", type=int, default=None, help="Vector dimension.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True, help="Test-provider seed.")
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--quiet", is_flag=True)
def cmd_index(store_path, out_path, provider, endpoint, dimension, seed, batch_size, quiet):
    """Build the vector index over every concept name in a store."""
    if provider == "remote":
        if not endpoint:
            raise click.UsageError("--provider remote requires --endpoint")
        if not dimension:
            raise click.UsageError("--provider remote requires --dimension")
    embedding = {
        "provider": provider,
        "endpoint": endpoint,
        "dimension": dimension if dimension else DEFAULT_DIMENSION,
        "seed": seed,
        "batch_size": batch_size,
    }
    try:
        embedder = build_embedder(embedding)
        store = ConceptStore.load(store_path)
        index = VectorIndex.build(list(store.concepts()), embedder)
        index.save(out_path)
    except EngineError as exc:
        _fail(exc)
    _note(quiet, f"indexed {len(index)} concepts at dimension {index.dimension}")


def _flatten_result(result: NameResult, mode: str) -> dict[str, object]:
    """Best-match summary row for CSV output."""
    row: dict[str, object] = {
        "name": result.name,
        "mode": mode,
        "reply": "",
        "concept_id": "",
        "concept_name": "",
        "score": "",
        "error": "",
    }
    for event in result.events:
        if event.event == "llm_output":
            row["reply"] = event.payload["reply"]
        elif event.event == "omop_output":
            entries = event.payload["CONCEPT"]
            if entries:
                top = entries[0]
                row["concept_id"] = top["concept_id"]
                row["concept_name"] = top["concept_name"]
                row["score"] = top["concept_name_similarity_score"]
        elif event.event == "vector_output":
            hits = event.payload["hits"]
            if hits:
                row["concept_id"] = hits[0]["concept_id"]
                row["concept_name"] = hits[0]["concept_name"]
                row["score"] = hits[0]["score"]
        elif event.event == "error":
            row["error"] = event.payload["error"]
    return row


@main.command("map")
@click.option("--name", "names", multiple=True, help="Informal name to map; repeatable.")
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False), help="CSV file of names.")
@click.option("--column", help="Column of --csv holding the names.")
@click.option("--store", "store_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--index", "index_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["vector_search", "llm", "rag", "db_search"]), default="rag", show_default=True)
@click.option("--k", type=int, default=None)
@click.option("--exact-threshold", type=float, default=None)
@click.option("--similarity-threshold", type=float, default=None)
@click.option("--vocabulary", "vocabularies", multiple=True, help="Vocabulary filter; repeatable. Pass 'all' to disable.")
@click.option("--include-synonyms", is_flag=True)
@click.option("--fetch-synonyms", is_flag=True)
@click.option("--fetch-ancestors", is_flag=True)
@click.option("--fetch-relationships", is_flag=True)
@click.option("--limit", "text_search_limit", type=int, default=None, help="Text-search candidate cap.")
@click.option("--provider", type=click.Choice(["test", "remote"]), default="test", show_default=True)
@click.option("--endpoint", help="Embedding endpoint URL (remote provider).")
@click.option("--dimension", type=int, default=None)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--backend", type=click.Choice(["stub", "remote"]), default="stub", show_default=True)
@click.option("--generation-endpoint", help="Completion endpoint URL (remote backend).")
@click.option("--model", default="", help="Model name for the remote backend.")
@click.option("--stub-replies", type=click.Path(exists=True, dir_okay=False), help="JSON object of informal -> formal names for the stub backend.")
@click.option("--format", "output_format", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Output file; stdout when omitted.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--quiet", is_flag=True)
def cmd_map(
    names,
    csv_path,
    column,
    store_path,
    index_path,
    mode,
    k,
    exact_threshold,
    similarity_threshold,
    vocabularies,
    include_synonyms,
    fetch_synonyms,
    fetch_ancestors,
    fetch_relationships,
    text_search_limit,
    provider,
    endpoint,
    dimension,
    seed,
    backend,
    generation_endpoint,
    model,
    stub_replies,
    output_format,
    out_path,
    workers,
    quiet,
):
    """Map one or more informal names and write the results."""
    if not names and not csv_path:
        raise click.UsageError("provide --name or --csv/--column")
    if names and csv_path:
        raise click.UsageError("--name and --csv are mutually exclusive")
    if csv_path and not column:
        raise click.UsageError("--csv requires --column")

    inputs = list(names)
    if csv_path:
        with open(csv_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            available = reader.fieldnames or []
            if column not in available:
                raise click.UsageError(
                    f"column {column!r} not in {csv_path}; available: {', '.join(available)}"
                )
            inputs = [(row[column] or "").strip() for row in reader]

    if mode in ("vector_search", "rag") and not index_path:
        raise click.UsageError(f"--mode {mode} requires --index")
    if backend == "remote" and mode in ("llm", "rag") and not generation_endpoint:
        raise click.UsageError("--backend remote requires --generation-endpoint")

    option_overrides: dict[str, object] = {"mode": mode}
    if k is not None:
        option_overrides["k"] = k
    if exact_threshold is not None:
        option_overrides["exact_match_threshold"] = exact_threshold
    if similarity_threshold is not None:
        option_overrides["similarity_threshold"] = similarity_threshold
    if vocabularies:
        option_overrides["vocabulary_filter"] = (
            None if list(vocabularies) == ["all"] else list(vocabularies)
        )
    if include_synonyms:
        option_overrides["include_synonyms"] = True
    if text_search_limit is not None:
        option_overrides["text_search_limit"] = text_search_limit
    if fetch_synonyms or fetch_ancestors or fetch_relationships:
        option_overrides["fetch_details"] = {
            "synonyms": fetch_synonyms,
            "ancestors": fetch_ancestors,
            "relationships": fetch_relationships,
        }

    try:
        options = options_from_dict(option_overrides)
        deps = PipelineDeps(
            store=ConceptStore.load(store_path),
            index=VectorIndex.load(index_path) if index_path else None,
            embedder=build_embedder(
                {
                    "provider": provider,
                    "endpoint": endpoint,
                    "dimension": dimension if dimension else DEFAULT_DIMENSION,
                    "seed": seed,
                }
            ),
            backend=build_backend(
                {
                    "backend": backend,
                    "endpoint": generation_endpoint,
                    "model": model,
                    "replies_path": stub_replies,
                }
            ),
        )
        results = run_batch(inputs, options, deps, workers=workers)
    except EngineError as exc:
        _fail(exc)

    if output_format == "json":
        rendered = json.dumps([r.to_dict() for r in results], ensure_ascii=False, indent=2)
    else:
        buffer = io.StringIO()
        writer = csv.DictWriter(
            buffer,
            fieldnames=["name", "mode", "reply", "concept_id", "concept_name", "score", "error"],
        )
        writer.writeheader()
        for result in results:
            writer.writerow(_flatten_result(result, options.mode))
        rendered = buffer.getvalue().rstrip("\n")

    if out_path:
        Path(out_path).write_text(rendered + "\n", encoding="utf-8")
        _note(quiet, f"wrote {len(results)} results to {out_path}")
    else:
        click.echo(rendered)


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--quiet", is_flag=True)
def cmd_serve(config_path, quiet):
    """Run the HTTP API server described by a config file."""
    import signal
    import threading

    import uvicorn

    from .server import create_app

    try:
        config = ServiceConfig.from_file(config_path).with_env_overrides()
        deps = build_deps(config)
        defaults = options_from_dict(config.options)
        app = create_app(deps, default_options=defaults, cors_origins=config.cors_origins)
    except EngineError as exc:
        _fail(exc)
    _note(quiet, f"serving on {config.host}:{config.port}")

    # The server runs off the main thread so SIGTERM/SIGINT can be turned
    # into a graceful shutdown with exit code 0 (uvicorn's own handler
    # re-raises the signal after shutdown, which reports a signal death).
    server = uvicorn.Server(
        uvicorn.Config(
            app,
            host=config.host,
            port=config.port,
            log_level="warning" if quiet else "info",
        )
    )

    def _graceful(signum, frame):
        server.should_exit = True

    signal.signal(signal.SIGTERM, _graceful)
    signal.signal(signal.SIGINT, _graceful)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while thread.is_alive():
        thread.join(timeout=0.2)


@main.command("eval")
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--results", "results_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--store", "store_path", type=click.Path(exists=True, dir_okay=False), help="Optional store for exact-match name resolution.")
@click.option("--quiet", is_flag=True)
def cmd_eval(annotations_path, results_path, report_path, store_path, quiet):
    """Classify results against annotations and write a report."""
    try:
        examples = load_annotations(annotations_path)
        results, methods = load_results(results_path)
        concept_names = None
        if store_path:
            store = ConceptStore.load(store_path)
            concept_names = {c.concept_id: c.concept_name for c in store.concepts()}
        records, report = evaluate(examples, results, concept_names=concept_names)
        comparison = top5_comparison(examples, methods) if methods else []
    except EngineError as exc:
        _fail(exc)

    payload = {
        "contingency": report.to_dict(),
        "records": [
            {
                "informal_name": r.informal_name,
                "exact_match": r.exact_match,
                "answer_in_vector_topk": r.answer_in_vector_topk,
                "llm_correct": r.llm_correct,
                "llm_relevant": r.llm_relevant,
                "excluded": r.excluded,
            }
            for r in records
        ],
        "top5_comparison": [
            {
                "method": row.method,
                "correct_in_top5": row.correct_in_top5,
                "relevant_in_top5": row.relevant_in_top5,
            }
            for row in comparison
        ],
    }
    Path(report_path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    if not quiet:
        click.echo(report.render_text())
        if comparison:
            click.echo("")
            for row in comparison:
                click.echo(
                    f"{row.method}: correct_in_top5={row.correct_in_top5} "
                    f"relevant_in_top5={row.relevant_in_top5}"
                )
    _note(quiet, f"report written to {report_path}")


if __name__ == "__main__":
    main()
