/** Strict reader for the simulator's CSV dialect: comma, dot decimal,
 * header row, LF. Every table carries a config_digest column; figures must
 * refuse mixed-provenance inputs, so the digest check lives here. */

export interface Table {
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}
export class DigestMismatchError extends Error {}

function splitLine(line: string, lineno: number): string[] {
  const fields: string[] = [];
  let cur = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cur += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch === '"' && cur === "") {
      quoted = true;
    } else if (ch === ",") {
      fields.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  if (quoted) throw new SchemaError(`line ${lineno}: unterminated quote`);
  fields.push(cur);
  return fields;
}

export function parseCsv(text: string): Table {
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) throw new SchemaError("empty CSV input");
  const header = splitLine(lines[0], 1);
  const rows = lines.slice(1).map((l, i) => splitLine(l, i + 2));
  for (const [i, r] of rows.entries()) {
    if (r.length !== header.length) {
      throw new SchemaError(`row ${i + 2}: ${r.length} fields, expected ${header.length}`);
    }
  }
  return { header, rows };
}

export function requireColumns(table: Table, names: string[]): void {
  for (const n of names) {
    if (!table.header.includes(n)) {
      throw new SchemaError(`missing column ${n}; header = ${table.header.join(",")}`);
    }
  }
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) throw new SchemaError(`no column ${name}`);
  return table.rows.map((r) => r[idx]);
}

export function numericColumn(table: Table, name: string): number[] {
  return column(table, name).map((v, i) => {
    const x = Number(v);
    if (!Number.isFinite(x)) throw new SchemaError(`column ${name}, row ${i + 2}: not a number (${v})`);
    return x;
  });
}

/** All rows of every table must agree on one digest (and match `expected`
 * when provided); returns it. */
export function sharedDigest(tables: Table[], expected?: string): string {
  const seen = new Set<string>();
  for (const t of tables) {
    if (t.rows.length === 0) throw new SchemaError("table has no data rows");
    for (const d of column(t, "config_digest")) seen.add(d);
  }
  if (seen.size !== 1) {
    throw new DigestMismatchError(`inputs carry ${seen.size} distinct config digests: ${[...seen].join(", ")}`);
  }
  const digest = [...seen][0];
  if (expected !== undefined && digest !== expected) {
    throw new DigestMismatchError(`digest ${digest} does not match expected ${expected}`);
  }
  return digest;
}
