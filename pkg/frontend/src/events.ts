/** Turn raw mapping events into the panel model the UI renders. */

import type { MappingEvent, NameResult } from "./api.js";

export type ScoreKind = "similarity" | "vector";

export interface CandidateView {
  conceptId: number;
  conceptName: string;
  vocabularyId: string | null;
  conceptCode: string | null;
  score: number;
  scoreKind: ScoreKind;
}

export interface PanelModel {
  name: string;
  reply: string | null;
  candidates: CandidateView[];
  /** True when the pipeline ran but nothing met the thresholds. */
  noMatch: boolean;
  warning: string | null;
  error: string | null;
  elapsedMs: number;
}

export function toPanelModel(result: NameResult): PanelModel {
  let reply: string | null = null;
  let warning: string | null = null;
  let error: string | null = null;
  const candidates: CandidateView[] = [];

  for (const event of result.events as MappingEvent[]) {
    if (event.event === "llm_output") {
      reply = event.payload.reply;
    } else if (event.event === "omop_output") {
      warning = event.payload.warning ?? warning;
      for (const entry of event.payload.CONCEPT) {
        candidates.push({
          conceptId: entry.concept_id,
          conceptName: entry.concept_name,
          vocabularyId: entry.vocabulary_id,
          conceptCode: entry.concept_code,
          score: entry.concept_name_similarity_score,
          scoreKind: "similarity",
        });
      }
    } else if (event.event === "vector_output") {
      for (const hit of event.payload.hits) {
        candidates.push({
          conceptId: hit.concept_id,
          conceptName: hit.concept_name,
          vocabularyId: hit.vocabulary_id,
          conceptCode: hit.concept_code,
          score: hit.score,
          scoreKind: "vector",
        });
      }
    } else if (event.event === "error") {
      error = `${event.payload.error}: ${event.payload.detail}`;
    }
  }

  return {
    name: result.name,
    reply,
    candidates,
    noMatch: error === null && candidates.length === 0,
    warning,
    error,
    elapsedMs: result.elapsed_ms,
  };
}
