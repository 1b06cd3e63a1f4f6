"""Embedded concept store: vocabulary ingestion, text search, detail lookup.

The store ingests tab-separated vocabulary downloads (header row, one table
per file), persists to a single JSONL file with a magic/version header, and
serves OR-of-terms text queries from an in-memory inverted index that is
rebuilt on load. Instances are immutable once loaded; concurrent reads are
safe.

Persistence layout (documented contract, version 1):

    line 1   JSON header: {"magic": "TMCSTORE", "version": 1, "counts": {...}}
    line 2+  one JSON record per line, tagged by "t":
             {"t": "c", "id", "name", "vocab", "code", "domain", "std"}
             {"t": "s", "id", "name"}                      concept synonym
             {"t": "a", "anc", "desc", "min", "max"}       ancestor link
             {"t": "r", "c1", "c2", "rel"}                 relationship

Records round-trip losslessly; field order is fixed so identical inputs
produce identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import (
    ConceptNotFoundError,
    EmptyQueryError,
    StoreFormatError,
    StoreUnavailableError,
    VocabularyFormatError,
)
from .text import query_terms, tokenize

STORE_MAGIC = "TMCSTORE"
STORE_VERSION = 1

TERM_SEPARATOR = " | "

_CONCEPT_COLUMNS = (
    "concept_id",
    "concept_name",
    "vocabulary_id",
    "concept_code",
    "domain_id",
    "standard_concept",
)
_SYNONYM_COLUMNS = ("concept_id", "concept_synonym_name")
_ANCESTOR_COLUMNS = (
    "ancestor_concept_id",
    "descendant_concept_id",
    "min_levels_of_separation",
)
_RELATIONSHIP_COLUMNS = ("concept_id_1", "concept_id_2", "relationship_id")


@dataclass(frozen=True)
class Concept:
    """One standard-vocabulary entry."""

    concept_id: int
    concept_name: str
    vocabulary_id: str
    concept_code: str
    domain_id: str = ""
    standard_concept: str | None = None


@dataclass(frozen=True)
class ConceptDetails:
    """A concept plus its optional auxiliary-table rows.

    All three lists are empty unless the corresponding fetch flag was
    enabled, matching the engine's default output shape.
    """

    concept: Concept
    synonyms: list[str] = field(default_factory=list)
    ancestors: list[tuple[int, int]] = field(default_factory=list)
    relationships: list[tuple[str, int]] = field(default_factory=list)


@dataclass(frozen=True)
class SearchQuery:
    """Preprocessed OR-of-terms text query.

    Invariants: terms are lowercase, non-empty, free of stop words and of
    removable punctuation; ``rendered`` joins them with " | ".
    """

    terms: tuple[str, ...]
    vocabulary_filter: tuple[str, ...] | None = None
    include_synonyms: bool = False

    @property
    def rendered(self) -> str:
        return TERM_SEPARATOR.join(self.terms)


@dataclass
class IngestStats:
    """Row counts per ingested table, plus rows skipped as malformed."""

    concepts: int = 0
    synonyms: int = 0
    ancestors: int = 0
    relationships: int = 0
    skipped: int = 0


def preprocess_search_term(
    raw: str,
    *,
    vocabulary_filter: Sequence[str] | None = None,
    include_synonyms: bool = False,
) -> SearchQuery:
    """Turn free text into a SearchQuery.

    Lowercases, replaces punctuation with spaces (keeping intra-word "-"
    and "/"), splits on whitespace, removes stop words and duplicates while
    preserving first-occurrence order.

    Raises EmptyQueryError when nothing survives, so callers report "no
    matches" instead of matching everything.
    """
    terms = query_terms(raw)
    if not terms:
        raise EmptyQueryError(f"no searchable terms in {raw!r}")
    vf = tuple(vocabulary_filter) if vocabulary_filter is not None else None
    return SearchQuery(
        terms=tuple(terms), vocabulary_filter=vf, include_synonyms=include_synonyms
    )


class ConceptStore:
    """In-memory concept database with a persistent single-file form.

    A fresh instance is unloaded: queries raise StoreUnavailableError until
    ``load`` or an ingest populates it. After that the store is read-only.
    """

    def __init__(self) -> None:
        self._loaded = False
        self._concepts: dict[int, Concept] = {}
        self._synonyms: dict[int, list[str]] = {}
        self._ancestors: dict[int, list[tuple[int, int]]] = {}
        self._ancestor_rows: list[tuple[int, int, int, int]] = []
        self._relationships: dict[int, list[tuple[str, int]]] = {}
        # token -> concept ids whose name (or synonym) contains the token
        self._name_postings: dict[str, set[int]] = {}
        self._synonym_postings: dict[str, set[int]] = {}

    # -- construction ------------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "ConceptStore":
        """Load a persisted store and rebuild the inverted index."""
        path = Path(path)
        store = cls()
        with path.open("r", encoding="utf-8") as fh:
            header_line = fh.readline()
            try:
                header = json.loads(header_line)
            except json.JSONDecodeError as exc:
                raise StoreFormatError(f"{path}: not a concept store file") from exc
            if header.get("magic") != STORE_MAGIC:
                raise StoreFormatError(f"{path}: bad magic {header.get('magic')!r}")
            if header.get("version") != STORE_VERSION:
                raise StoreFormatError(
                    f"{path}: unsupported store version {header.get('version')!r}"
                )
            for line in fh:
                if not line.strip():
                    continue
                rec = json.loads(line)
                tag = rec.get("t")
                if tag == "c":
                    store._add_concept(
                        Concept(
                            concept_id=rec["id"],
                            concept_name=rec["name"],
                            vocabulary_id=rec["vocab"],
                            concept_code=rec["code"],
                            domain_id=rec["domain"],
                            standard_concept=rec["std"],
                        )
                    )
                elif tag == "s":
                    store._add_synonym(rec["id"], rec["name"])
                elif tag == "a":
                    store._add_ancestor(rec["anc"], rec["desc"], rec["min"], rec["max"])
                elif tag == "r":
                    store._add_relationship(rec["c1"], rec["c2"], rec["rel"])
                else:
                    raise StoreFormatError(f"{path}: unknown record tag {tag!r}")
        store._loaded = True
        return store

    def save(self, path: str | Path) -> None:
        """Persist to the documented JSONL layout (lossless round-trip)."""
        path = Path(path)
        header = {
            "magic": STORE_MAGIC,
            "version": STORE_VERSION,
            "counts": {
                "concepts": len(self._concepts),
                "synonyms": sum(len(v) for v in self._synonyms.values()),
                "ancestors": len(self._ancestor_rows),
                "relationships": sum(len(v) for v in self._relationships.values()),
            },
        }
        with path.open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for cid in sorted(self._concepts):
                c = self._concepts[cid]
                fh.write(
                    json.dumps(
                        {
                            "t": "c",
                            "id": c.concept_id,
                            "name": c.concept_name,
                            "vocab": c.vocabulary_id,
                            "code": c.concept_code,
                            "domain": c.domain_id,
                            "std": c.standard_concept,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
            for cid in sorted(self._synonyms):
                for name in self._synonyms[cid]:
                    fh.write(
                        json.dumps({"t": "s", "id": cid, "name": name}, ensure_ascii=False)
                        + "\n"
                    )
            for anc, desc, lo, hi in self._ancestor_rows:
                fh.write(
                    json.dumps(
                        {"t": "a", "anc": anc, "desc": desc, "min": lo, "max": hi},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
            for cid in sorted(self._relationships):
                for rel, other in self._relationships[cid]:
                    fh.write(
                        json.dumps(
                            {"t": "r", "c1": cid, "c2": other, "rel": rel},
                            ensure_ascii=False,
                        )
                        + "\n"
                    )

    # -- internal mutation (ingest/load only) --------------------------------

    def _add_concept(self, concept: Concept) -> bool:
        if concept.concept_id in self._concepts:
            return False
        self._concepts[concept.concept_id] = concept
        for token in set(tokenize(concept.concept_name)):
            self._name_postings.setdefault(token, set()).add(concept.concept_id)
        return True

    def _add_synonym(self, concept_id: int, name: str) -> bool:
        if concept_id not in self._concepts:
            return False
        self._synonyms.setdefault(concept_id, []).append(name)
        for token in set(tokenize(name)):
            self._synonym_postings.setdefault(token, set()).add(concept_id)
        return True

    def _add_ancestor(self, ancestor: int, descendant: int, lo: int, hi: int) -> bool:
        if descendant not in self._concepts:
            return False
        self._ancestor_rows.append((ancestor, descendant, lo, hi))
        self._ancestors.setdefault(descendant, []).append((ancestor, lo))
        return True

    def _add_relationship(self, c1: int, c2: int, relationship_id: str) -> bool:
        if c1 not in self._concepts:
            return False
        self._relationships.setdefault(c1, []).append((relationship_id, c2))
        return True

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._concepts)

    @property
    def loaded(self) -> bool:
        return self._loaded

    def get(self, concept_id: int) -> Concept | None:
        return self._concepts.get(concept_id)

    def concepts(self) -> Iterator[Concept]:
        """All concepts, ordered by concept_id."""
        for cid in sorted(self._concepts):
            yield self._concepts[cid]

    def text_search(self, query: SearchQuery, limit: int) -> list[Concept]:
        """Concepts whose name (or synonym, when enabled) contains ANY term.

        OR semantics over the query terms; restricted to the query's
        vocabulary filter when present; ordered by match count descending,
        then concept_id ascending; capped at ``limit``.
        """
        return [c for c, _ in self.search_with_matches(query, limit)]

    def search_with_matches(
        self, query: SearchQuery, limit: int
    ) -> list[tuple[Concept, list[str]]]:
        """Like text_search, but pairs each concept with the names that matched.

        The matched-name list always starts with the primary concept name
        when it matched; synonym names that matched follow in stored order.
        Used by the pipeline to score similarity against whichever name
        actually hit.
        """
        if not self._loaded:
            raise StoreUnavailableError("concept store has not been loaded")
        if not query.terms:
            raise EmptyQueryError("query has no terms")
        if limit < 1:
            return []

        counts: dict[int, int] = {}
        for term in query.terms:
            matched = self._name_postings.get(term, frozenset())
            if query.include_synonyms:
                syn = self._synonym_postings.get(term)
                if syn:
                    matched = matched | syn
            for cid in matched:
                counts[cid] = counts.get(cid, 0) + 1

        vf = set(query.vocabulary_filter) if query.vocabulary_filter else None
        candidates = [
            cid
            for cid in counts
            if vf is None or self._concepts[cid].vocabulary_id in vf
        ]
        candidates.sort(key=lambda cid: (-counts[cid], cid))
        del candidates[limit:]

        term_set = set(query.terms)
        results: list[tuple[Concept, list[str]]] = []
        for cid in candidates:
            concept = self._concepts[cid]
            matched_names: list[str] = []
            if term_set & set(tokenize(concept.concept_name)):
                matched_names.append(concept.concept_name)
            if query.include_synonyms:
                for name in self._synonyms.get(cid, ()):
                    if term_set & set(tokenize(name)):
                        matched_names.append(name)
            results.append((concept, matched_names))
        return results

    def fetch_concept_details(
        self,
        concept_id: int,
        *,
        synonyms: bool = False,
        ancestors: bool = False,
        relationships: bool = False,
    ) -> ConceptDetails:
        """Concept plus auxiliary rows for the enabled flags only."""
        if not self._loaded:
            raise StoreUnavailableError("concept store has not been loaded")
        concept = self._concepts.get(concept_id)
        if concept is None:
            raise ConceptNotFoundError(f"concept {concept_id} not in store")
        return ConceptDetails(
            concept=concept,
            synonyms=list(self._synonyms.get(concept_id, ())) if synonyms else [],
            ancestors=list(self._ancestors.get(concept_id, ())) if ancestors else [],
            relationships=(
                list(self._relationships.get(concept_id, ())) if relationships else []
            ),
        )


# -- ingestion ----------------------------------------------------------------


def _read_table(
    path: Path, required: Sequence[str], table: str
) -> Iterator[dict[str, str]]:
    """Yield rows of a tab-separated file keyed by header column.

    Raises VocabularyFormatError if a required column is absent. Rows with
    the wrong field count yield ``None``-marked dicts via a "__bad__" key so
    the caller can count them as skipped.
    """
    with path.open("r", encoding="utf-8", newline="") as fh:
        header_line = fh.readline()
        if not header_line:
            raise VocabularyFormatError(f"{path}: empty file, expected a header row")
        columns = [c.strip().lower() for c in header_line.rstrip("\r\n").split("\t")]
        for column in required:
            if column not in columns:
                raise VocabularyFormatError(
                    f"{path}: {table} file is missing required column {column!r}"
                )
        index = {name: i for i, name in enumerate(columns)}
        for line in fh:
            line = line.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != len(columns):
                yield {"__bad__": line}
                continue
            yield {name: fields[i] for name, i in index.items()}


def _parse_int(value: str) -> int | None:
    try:
        return int(value.strip())
    except (ValueError, AttributeError):
        return None


def build_store(
    concept_file: str | Path,
    synonym_file: str | Path | None = None,
    ancestor_file: str | Path | None = None,
    relationship_file: str | Path | None = None,
) -> tuple[ConceptStore, IngestStats]:
    """Build an in-memory store from vocabulary download files.

    Malformed rows (wrong field count, non-numeric ids, empty names) are
    skipped and counted, never fatal. Missing required columns are fatal.
    """
    store = ConceptStore()
    stats = IngestStats()

    for row in _read_table(Path(concept_file), _CONCEPT_COLUMNS, "concept"):
        if "__bad__" in row:
            stats.skipped += 1
            continue
        cid = _parse_int(row["concept_id"])
        name = row["concept_name"].strip()
        if cid is None or cid <= 0 or not name:
            stats.skipped += 1
            continue
        std = row["standard_concept"].strip() or None
        added = store._add_concept(
            Concept(
                concept_id=cid,
                concept_name=name,
                vocabulary_id=row["vocabulary_id"].strip(),
                concept_code=row["concept_code"].strip(),
                domain_id=row["domain_id"].strip(),
                standard_concept=std,
            )
        )
        if added:
            stats.concepts += 1
        else:
            stats.skipped += 1

    if synonym_file is not None:
        for row in _read_table(Path(synonym_file), _SYNONYM_COLUMNS, "synonym"):
            if "__bad__" in row:
                stats.skipped += 1
                continue
            cid = _parse_int(row["concept_id"])
            name = row["concept_synonym_name"].strip()
            if cid is None or not name or not store._add_synonym(cid, name):
                stats.skipped += 1
                continue
            stats.synonyms += 1

    if ancestor_file is not None:
        for row in _read_table(Path(ancestor_file), _ANCESTOR_COLUMNS, "ancestor"):
            if "__bad__" in row:
                stats.skipped += 1
                continue
            anc = _parse_int(row["ancestor_concept_id"])
            desc = _parse_int(row["descendant_concept_id"])
            lo = _parse_int(row["min_levels_of_separation"])
            hi = _parse_int(row.get("max_levels_of_separation", "")) or lo
            if anc is None or desc is None or lo is None:
                stats.skipped += 1
                continue
            if not store._add_ancestor(anc, desc, lo, hi if hi is not None else lo):
                stats.skipped += 1
                continue
            stats.ancestors += 1

    if relationship_file is not None:
        for row in _read_table(
            Path(relationship_file), _RELATIONSHIP_COLUMNS, "relationship"
        ):
            if "__bad__" in row:
                stats.skipped += 1
                continue
            c1 = _parse_int(row["concept_id_1"])
            c2 = _parse_int(row["concept_id_2"])
            rel = row["relationship_id"].strip()
            if c1 is None or c2 is None or not rel or not store._add_relationship(c1, c2, rel):
                stats.skipped += 1
                continue
            stats.relationships += 1

    store._loaded = True
    return store, stats


def ingest_vocabulary(
    concept_file: str | Path,
    synonym_file: str | Path | None = None,
    ancestor_file: str | Path | None = None,
    relationship_file: str | Path | None = None,
    *,
    store_path: str | Path,
) -> IngestStats:
    """Ingest vocabulary files and persist the store to ``store_path``."""
    store, stats = build_store(
        concept_file, synonym_file, ancestor_file, relationship_file
    )
    store.save(store_path)
    return stats


def store_from_concepts(concepts: Iterable[Concept]) -> ConceptStore:
    """Build a loaded store directly from Concept objects (tests, demos)."""
    store = ConceptStore()
    for concept in concepts:
        store._add_concept(concept)
    store._loaded = True
    return store
