/** Client-side CSV: RFC 4180 quoting, comma delimiter, header row required. */

export interface ParsedCsv {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): ParsedCsv {
  const records: string[][] = [];
  let row: string[] = [];
  let cell = "";
  let inQuotes = false;
  let i = 0;

  const endCell = () => {
    row.push(cell);
    cell = "";
  };
  const endRow = () => {
    records.push(row);
    row = [];
  };

  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          cell += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      cell += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      endCell();
      i += 1;
    } else if (ch === "\r") {
      i += 1;
    } else if (ch === "\n") {
      endCell();
      endRow();
      i += 1;
    } else {
      cell += ch;
      i += 1;
    }
  }
  if (cell.length > 0 || row.length > 0) {
    endCell();
    endRow();
  }

  const nonEmpty = records.filter((r) => r.some((c) => c.trim() !== ""));
  if (nonEmpty.length === 0) {
    throw new Error("CSV file is empty");
  }
  const [headerRow, ...rows] = nonEmpty;
  return { header: (headerRow ?? []).map((h) => h.trim()), rows };
}

/** Values of one named column, trimmed, empties dropped. */
export function columnValues(parsed: ParsedCsv, column: string): string[] {
  const index = parsed.header.indexOf(column);
  if (index < 0) {
    throw new Error(`column "${column}" not found; available: ${parsed.header.join(", ")}`);
  }
  return parsed.rows
    .map((row) => (row[index] ?? "").trim())
    .filter((value) => value.length > 0);
}

function escapeCell(value: string): string {
  if (/[",\n\r]/.test(value)) {
    return `"${value.replace(/"/g, '""')}"`;
  }
  return value;
}

export function serializeCsv(header: string[], rows: (string | number)[][]): string {
  const lines = [header.map(escapeCell).join(",")];
  for (const row of rows) {
    lines.push(row.map((cell) => escapeCell(String(cell))).join(","));
  }
  return lines.join("\r\n") + "\r\n";
}
