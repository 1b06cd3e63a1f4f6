/** Client-side log of accepted mappings; exported as CSV, never persisted
 * server-side. */

import { parseCsv, serializeCsv } from "./csv.js";

export const DECISIONS_HEADER = [
  "informal_name",
  "concept_id",
  "concept_name",
  "score",
  "accepted_by",
  "timestamp",
] as const;

export interface Decision {
  informalName: string;
  conceptId: number;
  conceptName: string;
  score: number;
  acceptedBy: string;
  /** ISO-8601, recorded at accept time. */
  timestamp: string;
}

export class DecisionLog {
  private byName = new Map<string, Decision>();

  constructor(private readonly now: () => Date = () => new Date()) {}

  /** Accept one candidate for a name; a later accept replaces the earlier. */
  accept(
    informalName: string,
    candidate: { conceptId: number; conceptName: string; score: number },
    acceptedBy = "reviewer",
  ): Decision {
    const decision: Decision = {
      informalName,
      conceptId: candidate.conceptId,
      conceptName: candidate.conceptName,
      score: candidate.score,
      acceptedBy,
      timestamp: this.now().toISOString(),
    };
    this.byName.set(informalName, decision);
    return decision;
  }

  retract(informalName: string): void {
    this.byName.delete(informalName);
  }

  acceptedFor(informalName: string): Decision | undefined {
    return this.byName.get(informalName);
  }

  get size(): number {
    return this.byName.size;
  }

  list(): Decision[] {
    return [...this.byName.values()];
  }

  toCsv(): string {
    return serializeCsv(
      [...DECISIONS_HEADER],
      this.list().map((d) => [
        d.informalName,
        d.conceptId,
        d.conceptName,
        d.score,
        d.acceptedBy,
        d.timestamp,
      ]),
    );
  }
}

/** Parse an exported decisions CSV back into decisions (round-trip). */
export function decisionsFromCsv(text: string): Decision[] {
  const parsed = parseCsv(text);
  const expected = DECISIONS_HEADER.join(",");
  if (parsed.header.join(",") !== expected) {
    throw new Error(`decisions CSV must have header: ${expected}`);
  }
  return parsed.rows.map((row) => ({
    informalName: row[0] ?? "",
    conceptId: Number(row[1]),
    conceptName: row[2] ?? "",
    score: Number(row[3]),
    acceptedBy: row[4] ?? "",
    timestamp: row[5] ?? "",
  }));
}
