/** Typed client for the mapping API. All backend access goes through here. */

export interface AncestorEntry {
  ancestor_concept_id: number;
  levels_of_separation: number;
}

export interface RelationshipEntry {
  relationship_id: string;
  related_concept_id: number;
}

export interface ConceptEntry {
  concept_name: string;
  concept_id: number;
  vocabulary_id: string;
  concept_code: string;
  concept_name_similarity_score: number;
  CONCEPT_SYNONYM: string[];
  CONCEPT_ANCESTOR: AncestorEntry[];
  CONCEPT_RELATIONSHIP: RelationshipEntry[];
}

export interface VectorHitEntry {
  concept_id: number;
  concept_name: string;
  score: number;
  vocabulary_id: string | null;
  concept_code: string | null;
  CONCEPT_SYNONYM: string[];
  CONCEPT_ANCESTOR: AncestorEntry[];
  CONCEPT_RELATIONSHIP: RelationshipEntry[];
}

export interface LlmPayload {
  reply: string;
  informal_name: string;
  meta: unknown[];
}

export interface OmopPayload {
  search_term: string;
  CONCEPT: ConceptEntry[];
  warning?: string;
}

export interface VectorPayload {
  search_term: string;
  hits: VectorHitEntry[];
}

export interface ErrorPayload {
  informal_name: string;
  error: string;
  detail: string;
}

export type MappingEvent =
  | { event: "llm_output"; payload: LlmPayload }
  | { event: "omop_output"; payload: OmopPayload }
  | { event: "vector_output"; payload: VectorPayload }
  | { event: "error"; payload: ErrorPayload };

export interface NameResult {
  name: string;
  events: MappingEvent[];
  elapsed_ms: number;
}

export interface Health {
  status: string;
  store_loaded: boolean;
  index_loaded: boolean;
  backend_reachable: boolean;
}

export interface ConceptDetails {
  concept: {
    concept_id: number;
    concept_name: string;
    vocabulary_id: string;
    concept_code: string;
    domain_id: string;
    standard_concept: string | null;
  };
  synonyms: string[];
  ancestors: AncestorEntry[];
  relationships: RelationshipEntry[];
}

export interface PipelineOptionsPayload {
  mode?: string;
  k?: number;
  exact_match_threshold?: number;
  similarity_threshold?: number;
  vocabulary_filter?: string[] | null;
  include_synonyms?: boolean;
  fetch_details?: { synonyms: boolean; ancestors: boolean; relationships: boolean };
}

export interface MapRequestPayload {
  names: string[];
  pipeline_options?: PipelineOptionsPayload;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly code: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let code = "http_error";
  let detail = response.statusText;
  try {
    const body = (await response.json()) as { error?: string; detail?: unknown };
    if (body.error) code = body.error;
    if (body.detail) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(`${response.status}: ${detail}`, response.status, code);
}

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  async mapNames(request: MapRequestPayload): Promise<NameResult[]> {
    const response = await this.fetchFn(this.url("/api/pipeline"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    await raiseForStatus(response);
    return (await response.json()) as NameResult[];
  }

  async health(): Promise<Health> {
    const response = await this.fetchFn(this.url("/api/health"));
    await raiseForStatus(response);
    return (await response.json()) as Health;
  }

  async conceptDetails(
    conceptId: number,
    flags: { synonyms?: boolean; ancestors?: boolean; relationships?: boolean } = {},
  ): Promise<ConceptDetails> {
    const params = new URLSearchParams();
    if (flags.synonyms) params.set("synonyms", "true");
    if (flags.ancestors) params.set("ancestors", "true");
    if (flags.relationships) params.set("relationships", "true");
    const query = params.toString();
    const response = await this.fetchFn(
      this.url(`/api/concepts/${conceptId}${query ? `?${query}` : ""}`),
    );
    await raiseForStatus(response);
    return (await response.json()) as ConceptDetails;
  }
}
