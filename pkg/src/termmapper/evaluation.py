"""Assessment of mapping outputs against human-annotated ground truth.

Each annotated example names the single best concept for an informal term
plus a broader set of acceptable concepts. Pipeline outputs are classified
per example (exact match, answer-in-retrieval, generator correct/relevant)
and summarized into a contingency report whose marginals always sum to the
record count. A separate comparison counts, per method, how many examples
had the correct / any relevant concept in that method's top-5 results.

Annotations are CSV with columns: informal_name, best_concept_id,
acceptable_concept_ids (semicolon-separated), parsable. Results are JSON;
see load_results for the schema.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import EvalValidationError
from .vectors import VectorHit

EXACT_MATCH_POLICY = "acceptable_set"

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f", ""}


@dataclass(frozen=True)
class AnnotatedExample:
    """Ground truth for one informal name.

    Not-parsable examples carry no concept ids at all; a present best id is
    always a member of the acceptable set (the loader enforces this by
    construction).
    """

    informal_name: str
    best_concept_id: int | None
    acceptable_concept_ids: frozenset[int]
    parsable: bool

    def __post_init__(self) -> None:
        if not self.parsable:
            if self.best_concept_id is not None or self.acceptable_concept_ids:
                raise EvalValidationError(
                    f"{self.informal_name!r}: not-parsable examples cannot "
                    "carry concept ids"
                )
        elif self.best_concept_id is not None:
            if self.best_concept_id not in self.acceptable_concept_ids:
                raise EvalValidationError(
                    f"{self.informal_name!r}: best concept must be in the "
                    "acceptable set"
                )


@dataclass(frozen=True)
class AssessmentRecord:
    """Classification of one example's pipeline output."""

    informal_name: str
    exact_match: bool
    answer_in_vector_topk: bool
    llm_correct: bool
    llm_relevant: bool
    excluded: bool = False


@dataclass(frozen=True)
class ContingencyReport:
    """Counts mirroring the standard assessment table.

    Correct/incorrect cells only cover parsable, non-exact-match examples;
    exact matches and not-parsable examples are their own rows. All
    marginals sum: in_vector + not_in_vector + exact_match + not_parsable
    equals total.
    """

    not_parsable: int
    exact_match: int
    in_vector_correct: int
    in_vector_incorrect: int
    not_in_vector_correct: int
    not_in_vector_incorrect: int

    @property
    def in_vector_total(self) -> int:
        return self.in_vector_correct + self.in_vector_incorrect

    @property
    def not_in_vector_total(self) -> int:
        return self.not_in_vector_correct + self.not_in_vector_incorrect

    @property
    def total_correct(self) -> int:
        return self.in_vector_correct + self.not_in_vector_correct

    @property
    def total_incorrect(self) -> int:
        return self.in_vector_incorrect + self.not_in_vector_incorrect

    @property
    def total(self) -> int:
        return (
            self.not_parsable
            + self.exact_match
            + self.in_vector_total
            + self.not_in_vector_total
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "not_parsable": self.not_parsable,
            "exact_match": self.exact_match,
            "in_vector": {
                "correct": self.in_vector_correct,
                "incorrect": self.in_vector_incorrect,
                "total": self.in_vector_total,
            },
            "not_in_vector": {
                "correct": self.not_in_vector_correct,
                "incorrect": self.not_in_vector_incorrect,
                "total": self.not_in_vector_total,
            },
            "total_correct": self.total_correct,
            "total_incorrect": self.total_incorrect,
            "total": self.total,
            "exact_match_policy": EXACT_MATCH_POLICY,
        }

    def render_text(self) -> str:
        rows = [
            ("", "", "Correct", "Incorrect", "Total"),
            ("Not parsable", "", "", "", str(self.not_parsable)),
            ("Parsable", "Exact match", "", "", str(self.exact_match)),
            (
                "",
                "Answer in vector search",
                str(self.in_vector_correct),
                str(self.in_vector_incorrect),
                str(self.in_vector_total),
            ),
            (
                "",
                "Answer not in vector search",
                str(self.not_in_vector_correct),
                str(self.not_in_vector_incorrect),
                str(self.not_in_vector_total),
            ),
            (
                "Total",
                "",
                str(self.total_correct),
                str(self.total_incorrect),
                str(self.total),
            ),
        ]
        widths = [max(len(row[i]) for row in rows) for i in range(5)]
        lines = [
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class MethodRow:
    """Top-5 membership counts for one retrieval method."""

    method: str
    correct_in_top5: int
    relevant_in_top5: int


def classify(
    example: AnnotatedExample,
    vector_hits: Sequence[VectorHit],
    llm_concept_id: int | None,
    *,
    concept_names: Mapping[int, str] | None = None,
) -> AssessmentRecord:
    """Judge one example's outputs against its annotation.

    Name lookups for the exact-match criterion come from ``concept_names``
    merged with the hit names. Not-parsable examples come back flagged
    ``excluded`` with every criterion false; they stay out of correctness
    denominators.
    """
    if not example.parsable:
        return AssessmentRecord(
            informal_name=example.informal_name,
            exact_match=False,
            answer_in_vector_topk=False,
            llm_correct=False,
            llm_relevant=False,
            excluded=True,
        )

    names: dict[int, str] = dict(concept_names or {})
    for hit in vector_hits:
        names.setdefault(hit.concept_id, hit.concept_name)

    wanted = example.informal_name.strip().lower()
    exact = any(
        cid in example.acceptable_concept_ids
        and names.get(cid, "").strip().lower() == wanted
        for cid in names
    )
    in_topk = any(
        hit.concept_id in example.acceptable_concept_ids for hit in vector_hits
    )
    correct = llm_concept_id is not None and llm_concept_id == example.best_concept_id
    relevant = correct or (
        llm_concept_id is not None
        and llm_concept_id in example.acceptable_concept_ids
    )
    return AssessmentRecord(
        informal_name=example.informal_name,
        exact_match=exact,
        answer_in_vector_topk=in_topk,
        llm_correct=correct,
        llm_relevant=relevant,
    )


def summarize(records: Sequence[AssessmentRecord]) -> ContingencyReport:
    """Aggregate records into the contingency table."""
    not_parsable = 0
    exact = 0
    cells = {(True, True): 0, (True, False): 0, (False, True): 0, (False, False): 0}
    for record in records:
        if record.excluded:
            not_parsable += 1
        elif record.exact_match:
            exact += 1
        else:
            cells[(record.answer_in_vector_topk, record.llm_correct)] += 1
    return ContingencyReport(
        not_parsable=not_parsable,
        exact_match=exact,
        in_vector_correct=cells[(True, True)],
        in_vector_incorrect=cells[(True, False)],
        not_in_vector_correct=cells[(False, True)],
        not_in_vector_incorrect=cells[(False, False)],
    )


def top5_comparison(
    examples: Sequence[AnnotatedExample],
    per_method: Mapping[str, Mapping[str, Sequence[int]]],
) -> list[MethodRow]:
    """Per-method counts of correct / relevant concepts in the top results.

    ``per_method`` maps method name to {informal_name: top concept ids}.
    Every method must cover every parsable example; not-parsable examples
    are skipped. Rows come back sorted by method name.
    """
    parsable = [ex for ex in examples if ex.parsable]
    rows: list[MethodRow] = []
    for method in sorted(per_method):
        results = per_method[method]
        missing = [ex.informal_name for ex in parsable if ex.informal_name not in results]
        if missing:
            raise EvalValidationError(
                f"method {method!r} is missing results for: {', '.join(missing)}"
            )
        correct = 0
        relevant = 0
        for ex in parsable:
            top = set(results[ex.informal_name])
            if ex.best_concept_id is not None and ex.best_concept_id in top:
                correct += 1
            if top & ex.acceptable_concept_ids:
                relevant += 1
        rows.append(
            MethodRow(method=method, correct_in_top5=correct, relevant_in_top5=relevant)
        )
    return rows


# -- file formats ----------------------------------------------------------------


def load_annotations(path: str | Path) -> list[AnnotatedExample]:
    """Read the annotation CSV; see the module docstring for columns."""
    path = Path(path)
    examples: list[AnnotatedExample] = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"informal_name", "best_concept_id", "acceptable_concept_ids", "parsable"}
        fields = set(reader.fieldnames or ())
        if not required <= fields:
            raise EvalValidationError(
                f"{path}: annotation file is missing columns "
                f"{sorted(required - fields)}"
            )
        for line_no, row in enumerate(reader, start=2):
            name = (row["informal_name"] or "").strip()
            if not name:
                raise EvalValidationError(f"{path}:{line_no}: empty informal_name")
            raw_parsable = (row["parsable"] or "").strip().lower()
            if raw_parsable in _TRUE:
                parsable = True
            elif raw_parsable in _FALSE:
                parsable = False
            else:
                raise EvalValidationError(
                    f"{path}:{line_no}: unrecognized parsable value {raw_parsable!r}"
                )
            best_raw = (row["best_concept_id"] or "").strip()
            best = int(best_raw) if best_raw else None
            acceptable = {
                int(part)
                for part in (row["acceptable_concept_ids"] or "").split(";")
                if part.strip()
            }
            if best is not None:
                acceptable.add(best)
            if not parsable:
                best, acceptable = None, set()
            examples.append(
                AnnotatedExample(
                    informal_name=name,
                    best_concept_id=best,
                    acceptable_concept_ids=frozenset(acceptable),
                    parsable=parsable,
                )
            )
    if not examples:
        raise EvalValidationError(f"{path}: no annotated examples")
    return examples


def load_results(path: str | Path) -> tuple[dict[str, Any], dict[str, dict[str, list[int]]]]:
    """Read a results JSON file.

    Schema:
        {
          "results": [
            {"informal_name": str,
             "vector_hits": [{"concept_id": int, "concept_name": str,
                              "score": float}, ...],
             "llm_concept_id": int | null},
            ...
          ],
          "methods": {                      # optional, for top-5 comparison
            "<method>": [{"informal_name": str,
                          "top_concept_ids": [int, ...]}, ...]
          }
        }

    Returns (results keyed by informal_name, methods mapping).
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "results" not in data or not isinstance(data["results"], list):
        raise EvalValidationError(f"{path}: missing 'results' list")
    results: dict[str, Any] = {}
    for entry in data["results"]:
        name = entry.get("informal_name")
        if not name:
            raise EvalValidationError(f"{path}: result entry without informal_name")
        results[name] = entry
    methods: dict[str, dict[str, list[int]]] = {}
    for method, entries in (data.get("methods") or {}).items():
        methods[method] = {
            e["informal_name"]: list(e["top_concept_ids"]) for e in entries
        }
    return results, methods


def evaluate(
    examples: Sequence[AnnotatedExample],
    results: Mapping[str, Any],
    *,
    concept_names: Mapping[int, str] | None = None,
) -> tuple[list[AssessmentRecord], ContingencyReport]:
    """Classify every example against its result entry and summarize.

    Raises EvalValidationError listing the names any result is missing for.
    """
    missing = [ex.informal_name for ex in examples if ex.informal_name not in results]
    if missing:
        raise EvalValidationError(
            f"results are missing entries for: {', '.join(missing)}"
        )
    records = []
    for ex in examples:
        entry = results[ex.informal_name]
        hits = [
            VectorHit(
                concept_id=h["concept_id"],
                concept_name=h.get("concept_name", ""),
                score=h.get("score", 0.0),
            )
            for h in entry.get("vector_hits", ())
        ]
        records.append(
            classify(
                ex,
                hits,
                entry.get("llm_concept_id"),
                concept_names=concept_names,
            )
        )
    return records, summarize(records)
