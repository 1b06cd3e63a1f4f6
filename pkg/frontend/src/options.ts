/** Pipeline options as the UI models them, mirroring the engine defaults. */

import type { MapRequestPayload, PipelineOptionsPayload } from "./api.js";
import { validateNames } from "./names.js";

export const MODES = ["rag", "llm", "vector_search", "db_search"] as const;
export type Mode = (typeof MODES)[number];

export const K_MIN = 1;
export const K_MAX = 20;

export interface UiOptions {
  mode: Mode;
  k: number;
  exactMatchThreshold: number;
  similarityThreshold: number;
  /** null disables the vocabulary filter entirely. */
  vocabularyFilter: string[] | null;
  includeSynonyms: boolean;
  fetchSynonyms: boolean;
  fetchAncestors: boolean;
  fetchRelationships: boolean;
}

/** Must stay in lockstep with the engine's defaults. */
export const DEFAULT_OPTIONS: UiOptions = {
  mode: "rag",
  k: 5,
  exactMatchThreshold: 0.95,
  similarityThreshold: 80,
  vocabularyFilter: ["RxNorm"],
  includeSynonyms: false,
  fetchSynonyms: false,
  fetchAncestors: false,
  fetchRelationships: false,
};

export function validateOptions(options: UiOptions): string | null {
  if (!MODES.includes(options.mode)) return `unknown mode ${options.mode}`;
  if (!Number.isInteger(options.k) || options.k < K_MIN || options.k > K_MAX) {
    return `k must be an integer in ${K_MIN}..${K_MAX}`;
  }
  if (!(options.exactMatchThreshold > 0 && options.exactMatchThreshold <= 1)) {
    return "exact-match threshold must be in (0, 1]";
  }
  if (!(options.similarityThreshold >= 0 && options.similarityThreshold <= 100)) {
    return "similarity threshold must be in [0, 100]";
  }
  return null;
}

/** Wire form of the options; every reachable control state validates server-side. */
export function toPipelinePayload(options: UiOptions): PipelineOptionsPayload {
  return {
    mode: options.mode,
    k: options.k,
    exact_match_threshold: options.exactMatchThreshold,
    similarity_threshold: options.similarityThreshold,
    vocabulary_filter: options.vocabularyFilter,
    include_synonyms: options.includeSynonyms,
    fetch_details: {
      synonyms: options.fetchSynonyms,
      ancestors: options.fetchAncestors,
      relationships: options.fetchRelationships,
    },
  };
}

export function buildMapRequest(names: string[], options: UiOptions): MapRequestPayload {
  const nameProblem = validateNames(names);
  if (nameProblem) throw new Error(nameProblem);
  const optionProblem = validateOptions(options);
  if (optionProblem) throw new Error(optionProblem);
  return { names, pipeline_options: toPipelinePayload(options) };
}
