import { EmptyData, SchemaMismatch } from "./errors.js";

export interface DataTable {
  metadata: Record<string, string>;
  columns: string[];
  /** Row-major numeric values, one entry per column. */
  rows: number[][];
}

/**
 * Parse the primary tool's CSV format: `# key=value` metadata lines,
 * a header row, then numeric rows.
 */
export function parseTable(text: string): DataTable {
  const metadata: Record<string, string> = {};
  let columns: string[] | null = null;
  const rows: number[][] = [];
  for (const rawLine of text.split(/\r?\n/)) {
    const line = rawLine.trimEnd();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const eq = body.indexOf("=");
      if (eq > 0) metadata[body.slice(0, eq)] = body.slice(eq + 1);
      continue;
    }
    if (columns === null) {
      columns = line.split(",");
      continue;
    }
    rows.push(line.split(",").map(Number));
  }
  if (columns === null) {
    throw new SchemaMismatch("no header row found");
  }
  return { metadata, columns, rows };
}

/** Column index lookup that names the missing column on failure. */
export function columnIndex(table: DataTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new SchemaMismatch(
      `missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

export function requirePreset(table: DataTable, wanted: string, role = "input"): void {
  const preset = table.metadata["preset"] ?? "";
  if (preset !== wanted) {
    throw new SchemaMismatch(
      `${role} carries preset '${preset}', expected '${wanted}'`,
    );
  }
}

export function requireRows(table: DataTable, role = "input"): void {
  if (table.rows.length === 0) {
    throw new EmptyData(`${role} has no data rows`);
  }
}

/** Extract one named column as a plain array. */
export function column(table: DataTable, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => row[idx]);
}
