/**
 * Parser for the simulation CSV contract:
 *
 *   t,fidelity,overlap_other_strings,matter_occupation,energy,norm_error
 *
 * Header and column order are fixed; every row carries six finite numbers.
 */

export const CSV_COLUMNS = [
  "t",
  "fidelity",
  "overlap_other_strings",
  "matter_occupation",
  "energy",
  "norm_error",
] as const;

export type ColumnName = (typeof CSV_COLUMNS)[number];

export interface Series {
  path: string;
  columns: Record<ColumnName, number[]>;
  nRows: number;
}

export class CsvError extends Error {}

export function parseCsv(text: string, path: string): Series {
  const lines = text
    .split(/\r?\n/)
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${path}: file is empty`);
  }
  const header = lines[0].split(",").map((h) => h.trim());
  for (const wanted of CSV_COLUMNS) {
    if (!header.includes(wanted)) {
      throw new CsvError(`${path}: missing column '${wanted}'`);
    }
  }
  if (header.length !== CSV_COLUMNS.length) {
    const extra = header.filter((h) => !(CSV_COLUMNS as readonly string[]).includes(h));
    throw new CsvError(`${path}: unexpected columns ${extra.join(", ")}`);
  }
  const order = CSV_COLUMNS.map((c) => header.indexOf(c));
  const body = lines.slice(1);
  if (body.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  const columns = Object.fromEntries(
    CSV_COLUMNS.map((c) => [c, [] as number[]]),
  ) as Record<ColumnName, number[]>;
  body.forEach((line, i) => {
    const parts = line.split(",");
    if (parts.length !== CSV_COLUMNS.length) {
      throw new CsvError(`${path}: row ${i + 2} has ${parts.length} fields`);
    }
    CSV_COLUMNS.forEach((name, k) => {
      const value = Number(parts[order[k]]);
      if (!Number.isFinite(value)) {
        throw new CsvError(`${path}: row ${i + 2}, column '${name}' is not a number`);
      }
      columns[name].push(value);
    });
  });
  return { path, columns, nRows: body.length };
}

export async function loadCsv(path: string): Promise<Series> {
  const { readFile } = await import("node:fs/promises");
  let text: string;
  try {
    text = await readFile(path, "utf8");
  } catch (err) {
    throw new CsvError(`${path}: ${(err as Error).message}`);
  }
  return parseCsv(text, path);
}
