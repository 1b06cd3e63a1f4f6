/** Free-text entry: a comma-separated list of informal names. */

export const MAX_NAME_LENGTH = 512;

/** Split on commas, trim, drop empties (so a trailing comma is harmless). */
export function parseNameList(raw: string): string[] {
  return raw
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0);
}

/** Null when the list is submittable, otherwise a user-facing problem. */
export function validateNames(names: string[]): string | null {
  if (names.length === 0) return "enter at least one name";
  const tooLong = names.find((name) => name.length > MAX_NAME_LENGTH);
  if (tooLong) {
    return `name exceeds ${MAX_NAME_LENGTH} characters: "${tooLong.slice(0, 40)}..."`;
  }
  return null;
}
