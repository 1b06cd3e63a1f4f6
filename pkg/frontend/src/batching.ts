/** Sequential batch submission: one in-flight request, results in order. */

import type { NameResult } from "./api.js";

export const BATCH_SIZE = 25;

export function chunk<T>(items: T[], size: number = BATCH_SIZE): T[][] {
  if (size < 1) throw new Error("batch size must be >= 1");
  const out: T[][] = [];
  for (let start = 0; start < items.length; start += size) {
    out.push(items.slice(start, start + size));
  }
  return out;
}

export interface BatchProgress {
  done: number;
  total: number;
  batch: NameResult[];
}

/**
 * Run every batch through `submit`, awaiting each before the next so at
 * most one pipeline request is ever in flight. `onProgress` fires after
 * each batch with the cumulative count and that batch's results.
 */
export async function runInBatches(
  names: string[],
  submit: (batch: string[]) => Promise<NameResult[]>,
  onProgress?: (progress: BatchProgress) => void,
  batchSize: number = BATCH_SIZE,
): Promise<NameResult[]> {
  const all: NameResult[] = [];
  const batches = chunk(names, batchSize);
  let done = 0;
  for (const batch of batches) {
    const results = await submit(batch);
    all.push(...results);
    done += batch.length;
    onProgress?.({ done, total: names.length, batch: results });
  }
  return all;
}
