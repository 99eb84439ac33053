/** CSV reading with schema checks that name the missing column. */

export interface Table {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error("empty CSV document");
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  return { columns, rows };
}

export function requireColumns(table: Table, required: string[], path: string): void {
  for (const col of required) {
    if (!table.columns.includes(col)) {
      throw new Error(`${path}: missing column '${col}' (found: ${table.columns.join(", ")})`);
    }
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  return table.rows.map((r) => r[idx]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((v) => {
    if (v === "-inf") return -Infinity;
    if (v === "inf") return Infinity;
    const x = Number(v);
    if (!Number.isFinite(x) && v !== "-inf" && v !== "inf") {
      throw new Error(`column '${name}': non-numeric value '${v}'`);
    }
    return x;
  });
}

/** Stable unique values in first-appearance order. */
export function uniqueInOrder(values: string[]): string[] {
  const seen = new Set<string>();
  const out: string[] = [];
  for (const v of values) {
    if (!seen.has(v)) {
      seen.add(v);
      out.push(v);
    }
  }
  return out;
}
