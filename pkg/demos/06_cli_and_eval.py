#!/usr/bin/env python3
"""The command-line workflow: ingest, index, map, evaluate.

Runs each subcommand in-process and leaves store/index files under
demos/out/ that `termmapper serve --config demos/data/server_config.json`
can pick up afterwards.
"""

import json
from pathlib import Path

from click.testing import CliRunner

from termmapper.cli import main

HERE = Path(__file__).parent
DATA = HERE / "data"
OUT = HERE / "out"
OUT.mkdir(exist_ok=True)

runner = CliRunner()


def run(*args):
    print("$ termmapper", " ".join(args))
    result = runner.invoke(main, list(args))
    if result.output:
        print(result.output.rstrip())
    print(f"(exit {result.exit_code})")
    print()
    return result


run(
    "ingest",
    "--concepts", str(DATA / "CONCEPT.tsv"),
    "--synonyms", str(DATA / "CONCEPT_SYNONYM.tsv"),
    "--store", str(OUT / "store.jsonl"),
    "--force",
)

run("index", "--store", str(OUT / "store.jsonl"), "--out", str(OUT / "index.bin"))

run(
    "map",
    "--name", "Betnovate Scalp Application",
    "--store", str(OUT / "store.jsonl"),
    "--index", str(OUT / "index.bin"),
    "--stub-replies", str(DATA / "stub_replies.json"),
    "--format", "csv",
)

# A tiny evaluation: annotations plus results for two names.
annotations = OUT / "annotations.csv"
annotations.write_text(
    "informal_name,best_concept_id,acceptable_concept_ids,parsable\n"
    "Betnovate Scalp Application,920458,920458;920827,true\n"
    "Hollister (gout),,,false\n"
)
results = OUT / "results.json"
results.write_text(
    json.dumps(
        {
            "results": [
                {
                    "informal_name": "Betnovate Scalp Application",
                    "vector_hits": [
                        {"concept_id": 920458, "concept_name": "betamethasone", "score": 0.82}
                    ],
                    "llm_concept_id": 920458,
                },
                {"informal_name": "Hollister (gout)", "vector_hits": [], "llm_concept_id": None},
            ],
            "methods": {
                "vector": [
                    {"informal_name": "Betnovate Scalp Application", "top_concept_ids": [920458]},
                    {"informal_name": "Hollister (gout)", "top_concept_ids": []},
                ]
            },
        },
        indent=2,
    )
)

run(
    "eval",
    "--annotations", str(annotations),
    "--results", str(results),
    "--report", str(OUT / "report.json"),
    "--store", str(OUT / "store.jsonl"),
)

print(f"artifacts left in {OUT}/ - try: termmapper serve --config {DATA / 'server_config.json'}")
