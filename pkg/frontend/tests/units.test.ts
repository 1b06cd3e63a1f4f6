import { describe, expect, it } from "vitest";

import type { NameResult } from "../src/api.js";
import { BATCH_SIZE, chunk, runInBatches } from "../src/batching.js";
import { DecisionLog, decisionsFromCsv } from "../src/decisions.js";
import { toPanelModel } from "../src/events.js";
import { parseNameList, validateNames } from "../src/names.js";
import {
  DEFAULT_OPTIONS,
  buildMapRequest,
  toPipelinePayload,
  validateOptions,
} from "../src/options.js";
import { conceptEntry, llmAndOmopEvents } from "./helpers.js";

describe("parseNameList", () => {
  it("splits a comma-separated list", () => {
    expect(parseNameList("Tylenol, Advil")).toEqual(["Tylenol", "Advil"]);
  });

  it("tolerates a trailing comma and extra whitespace", () => {
    expect(parseNameList(" Tylenol ,  Advil , ")).toEqual(["Tylenol", "Advil"]);
  });

  it("returns empty for blank input", () => {
    expect(parseNameList("")).toEqual([]);
    expect(parseNameList("  ,  , ")).toEqual([]);
  });
});

describe("validateNames", () => {
  it("requires at least one name", () => {
    expect(validateNames([])).toMatch(/at least one/);
    expect(validateNames(["x"])).toBeNull();
  });

  it("rejects names over 512 characters", () => {
    expect(validateNames(["x".repeat(513)])).toMatch(/512/);
    expect(validateNames(["x".repeat(512)])).toBeNull();
  });
});

describe("options", () => {
  it("defaults mirror the engine defaults", () => {
    expect(DEFAULT_OPTIONS.mode).toBe("rag");
    expect(DEFAULT_OPTIONS.k).toBe(5);
    expect(DEFAULT_OPTIONS.exactMatchThreshold).toBe(0.95);
    expect(DEFAULT_OPTIONS.similarityThreshold).toBe(80);
    expect(DEFAULT_OPTIONS.vocabularyFilter).toEqual(["RxNorm"]);
    expect(DEFAULT_OPTIONS.includeSynonyms).toBe(false);
    expect(DEFAULT_OPTIONS.fetchSynonyms).toBe(false);
  });

  it("bounds k to the slider range", () => {
    expect(validateOptions({ ...DEFAULT_OPTIONS, k: 0 })).toMatch(/1\.\.20/);
    expect(validateOptions({ ...DEFAULT_OPTIONS, k: 21 })).toMatch(/1\.\.20/);
    expect(validateOptions({ ...DEFAULT_OPTIONS, k: 20 })).toBeNull();
  });

  it("validates thresholds", () => {
    expect(validateOptions({ ...DEFAULT_OPTIONS, exactMatchThreshold: 0 })).toMatch(/exact/);
    expect(validateOptions({ ...DEFAULT_OPTIONS, similarityThreshold: 101 })).toMatch(
      /similarity/,
    );
  });

  it("produces the wire field names", () => {
    const payload = toPipelinePayload({ ...DEFAULT_OPTIONS, fetchAncestors: true });
    expect(payload).toEqual({
      mode: "rag",
      k: 5,
      exact_match_threshold: 0.95,
      similarity_threshold: 80,
      vocabulary_filter: ["RxNorm"],
      include_synonyms: false,
      fetch_details: { synonyms: false, ancestors: true, relationships: false },
    });
  });

  it("buildMapRequest rejects bad inputs", () => {
    expect(() => buildMapRequest([], DEFAULT_OPTIONS)).toThrow(/at least one/);
    expect(() => buildMapRequest(["x"], { ...DEFAULT_OPTIONS, k: 0 })).toThrow(/1\.\.20/);
    expect(buildMapRequest(["x"], DEFAULT_OPTIONS).names).toEqual(["x"]);
  });
});

describe("batching", () => {
  it("chunks 400 names into 16 batches of 25", () => {
    const names = Array.from({ length: 400 }, (_, i) => `name ${i}`);
    const batches = chunk(names, BATCH_SIZE);
    expect(batches).toHaveLength(16);
    expect(batches.every((b) => b.length === 25)).toBe(true);
    expect(batches[0]?.[0]).toBe("name 0");
    expect(batches[15]?.[24]).toBe("name 399");
  });

  it("keeps a single request in flight and preserves order", async () => {
    let inFlight = 0;
    let maxInFlight = 0;
    const submitted: string[][] = [];
    const submit = async (batch: string[]): Promise<NameResult[]> => {
      inFlight += 1;
      maxInFlight = Math.max(maxInFlight, inFlight);
      await new Promise((resolve) => setTimeout(resolve, 1));
      submitted.push(batch);
      inFlight -= 1;
      return batch.map((name) => ({ name, events: [], elapsed_ms: 0 }));
    };
    const names = Array.from({ length: 60 }, (_, i) => `n${i}`);
    const progress: number[] = [];
    const results = await runInBatches(names, submit, (p) => progress.push(p.done), 25);
    expect(maxInFlight).toBe(1);
    expect(submitted.map((b) => b.length)).toEqual([25, 25, 10]);
    expect(progress).toEqual([25, 50, 60]);
    expect(results.map((r) => r.name)).toEqual(names);
  });
});

describe("toPanelModel", () => {
  it("extracts reply and similarity candidates", () => {
    const events = llmAndOmopEvents("Tylenol", "Acetaminophen", [
      [{ id: 1125315, name: "acetaminophen" }, 100.0],
      [{ id: 40231925, name: "acetaminophen / codeine Oral Capsule" }, 81.5],
    ]);
    const panel = toPanelModel({ name: "Tylenol", events, elapsed_ms: 3.2 });
    expect(panel.reply).toBe("Acetaminophen");
    expect(panel.candidates.map((c) => c.conceptId)).toEqual([1125315, 40231925]);
    expect(panel.candidates[0]?.scoreKind).toBe("similarity");
    expect(panel.noMatch).toBe(false);
  });

  it("extracts vector hits with vector score kind", () => {
    const panel = toPanelModel({
      name: "betamethasone",
      events: [
        {
          event: "vector_output",
          payload: {
            search_term: "betamethasone",
            hits: [
              {
                concept_id: 920458,
                concept_name: "betamethasone",
                score: 1.0,
                vocabulary_id: "RxNorm",
                concept_code: "1514",
                CONCEPT_SYNONYM: [],
                CONCEPT_ANCESTOR: [],
                CONCEPT_RELATIONSHIP: [],
              },
            ],
          },
        },
      ],
      elapsed_ms: 1.0,
    });
    expect(panel.candidates[0]?.scoreKind).toBe("vector");
    expect(panel.candidates[0]?.score).toBe(1.0);
  });

  it("flags empty results as no-match and keeps warnings", () => {
    const panel = toPanelModel({
      name: "and the of",
      events: [
        {
          event: "omop_output",
          payload: { search_term: "and the of", CONCEPT: [], warning: "empty_search_query" },
        },
      ],
      elapsed_ms: 0.4,
    });
    expect(panel.noMatch).toBe(true);
    expect(panel.warning).toBe("empty_search_query");
  });

  it("carries error events", () => {
    const panel = toPanelModel({
      name: "x",
      events: [
        {
          event: "error",
          payload: { informal_name: "x", error: "backend_unavailable", detail: "down" },
        },
      ],
      elapsed_ms: 0.1,
    });
    expect(panel.error).toMatch(/backend_unavailable/);
    expect(panel.noMatch).toBe(false);
  });
});

describe("DecisionLog", () => {
  const candidate = { conceptId: 1125315, conceptName: "acetaminophen", score: 100.0 };

  it("records and replaces decisions per name", () => {
    const log = new DecisionLog(() => new Date("2025-05-01T12:00:00Z"));
    log.accept("Tylenol", candidate);
    log.accept("Tylenol", { conceptId: 40231925, conceptName: "combo", score: 81.5 });
    expect(log.size).toBe(1);
    expect(log.acceptedFor("Tylenol")?.conceptId).toBe(40231925);
  });

  it("exports the documented CSV columns and round-trips", () => {
    const log = new DecisionLog(() => new Date("2025-05-01T12:00:00Z"));
    log.accept("Tylenol", candidate);
    log.accept("co, codamol", { conceptId: 40231925, conceptName: 'combo "x"', score: 81.5 });
    const csv = log.toCsv();
    expect(csv.split("\r\n")[0]).toBe(
      "informal_name,concept_id,concept_name,score,accepted_by,timestamp",
    );
    const back = decisionsFromCsv(csv);
    expect(back).toHaveLength(2);
    expect(back[0]?.conceptId).toBe(1125315);
    expect(back[1]?.informalName).toBe("co, codamol");
    expect(back[1]?.conceptName).toBe('combo "x"');
    expect(back[0]?.timestamp).toBe("2025-05-01T12:00:00.000Z");
  });

  it("rejects foreign CSV headers", () => {
    expect(() => decisionsFromCsv("a,b\n1,2\n")).toThrow(/header/);
  });
});

describe("conceptEntry helper shape", () => {
  it("carries the wire field names", () => {
    const entry = conceptEntry({ id: 1, name: "x" }, 90);
    expect(Object.keys(entry)).toEqual([
      "concept_name",
      "concept_id",
      "vocabulary_id",
      "concept_code",
      "concept_name_similarity_score",
      "CONCEPT_SYNONYM",
      "CONCEPT_ANCESTOR",
      "CONCEPT_RELATIONSHIP",
    ]);
  });
});
