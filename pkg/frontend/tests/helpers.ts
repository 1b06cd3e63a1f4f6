/** Shared test scaffolding: an in-memory backend behind a fetch stub. */

import type { ConceptEntry, MappingEvent, NameResult } from "../src/api.js";

export interface FakeConcept {
  id: number;
  name: string;
  vocabulary?: string;
  code?: string;
  synonyms?: string[];
}

export interface RecordedRequest {
  url: string;
  method: string;
  body?: unknown;
}

export function conceptEntry(concept: FakeConcept, score: number): ConceptEntry {
  return {
    concept_name: concept.name,
    concept_id: concept.id,
    vocabulary_id: concept.vocabulary ?? "RxNorm",
    concept_code: concept.code ?? String(concept.id),
    concept_name_similarity_score: score,
    CONCEPT_SYNONYM: [],
    CONCEPT_ANCESTOR: [],
    CONCEPT_RELATIONSHIP: [],
  };
}

export function llmAndOmopEvents(
  name: string,
  reply: string,
  concepts: [FakeConcept, number][],
): MappingEvent[] {
  return [
    {
      event: "llm_output",
      payload: { reply, informal_name: name, meta: [] },
    },
    {
      event: "omop_output",
      payload: {
        search_term: reply,
        CONCEPT: concepts.map(([concept, score]) => conceptEntry(concept, score)),
      },
    },
  ];
}

/**
 * A fetch replacement implementing /api/pipeline, /api/health and
 * /api/concepts/{id} over a fixed concept list. `respond` maps one name to
 * its events; requests are recorded for assertions.
 */
export class FakeBackend {
  readonly requests: RecordedRequest[] = [];
  inFlight = 0;
  maxInFlight = 0;
  /** Per-request artificial delay, to expose concurrency bugs. */
  delayMs = 0;

  constructor(
    private readonly concepts: FakeConcept[],
    private readonly respond: (name: string) => MappingEvent[],
  ) {}

  get pipelineRequests(): RecordedRequest[] {
    return this.requests.filter((r) => r.url.endsWith("/api/pipeline"));
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    this.requests.push({ url, method, body });

    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    if (this.delayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.delayMs));
    }
    try {
      if (url.endsWith("/api/health")) {
        return json({
          status: "ok",
          store_loaded: true,
          index_loaded: true,
          backend_reachable: true,
        });
      }
      if (url.endsWith("/api/pipeline") && method === "POST") {
        const names = (body as { names: string[] }).names;
        const results: NameResult[] = names.map((name) => ({
          name,
          events: this.respond(name),
          elapsed_ms: 1.0,
        }));
        return json(results);
      }
      const conceptMatch = url.match(/\/api\/concepts\/(\d+)/);
      if (conceptMatch) {
        const id = Number(conceptMatch[1]);
        const concept = this.concepts.find((c) => c.id === id);
        if (!concept) {
          return json({ error: "not_found", detail: `concept ${id} not in store` }, 404);
        }
        const wantSynonyms = url.includes("synonyms=true");
        return json({
          concept: {
            concept_id: concept.id,
            concept_name: concept.name,
            vocabulary_id: concept.vocabulary ?? "RxNorm",
            concept_code: concept.code ?? String(concept.id),
            domain_id: "Drug",
            standard_concept: "S",
          },
          synonyms: wantSynonyms ? (concept.synonyms ?? []) : [],
          ancestors: [],
          relationships: [],
        });
      }
      return json({ error: "not_found", detail: `no route for ${url}` }, 404);
    } finally {
      this.inFlight -= 1;
    }
  };
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export const FIXTURE_CONCEPTS: FakeConcept[] = [
  { id: 1125315, name: "acetaminophen", code: "161", synonyms: ["paracetamol"] },
  { id: 1177480, name: "ibuprofen", code: "5640" },
  { id: 1115008, name: "naproxen", code: "7258" },
];

export function replyBackend(replies: Record<string, [string, [FakeConcept, number][]]>): FakeBackend {
  return new FakeBackend(FIXTURE_CONCEPTS, (name) => {
    const match = replies[name];
    if (!match) {
      return [
        {
          event: "omop_output",
          payload: { search_term: name, CONCEPT: [] },
        },
      ];
    }
    const [reply, concepts] = match;
    return llmAndOmopEvents(name, reply, concepts);
  });
}
