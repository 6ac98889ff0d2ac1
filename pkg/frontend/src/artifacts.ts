/**
 * Readers for the simulation artifacts: numeric CSV tables with a header
 * row, plus their JSON metadata sidecars and analysis reports.
 */

import { readFileSync, existsSync } from 'node:fs';
import Papa from 'papaparse';

export interface Table {
  columns: string[];
  /** column name -> values, all finite numbers */
  data: Map<string, number[]>;
  rows: number;
}

export class ArtifactError extends Error {}

export function readTable(path: string): Table {
  if (!existsSync(path)) throw new ArtifactError(`no such artifact: ${path}`);
  const parsed = Papa.parse<Record<string, number>>(readFileSync(path, 'utf8').trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length) {
    throw new ArtifactError(`${path}: ${parsed.errors[0]!.message}`);
  }
  const columns = (parsed.meta.fields ?? []).slice();
  if (!columns.length) throw new ArtifactError(`${path}: empty header`);
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (const row of parsed.data) {
    for (const c of columns) {
      const v = row[c];
      if (typeof v !== 'number' || !Number.isFinite(v)) {
        throw new ArtifactError(`${path}: non-numeric entry in column ${c}`);
      }
      data.get(c)!.push(v);
    }
  }
  return { columns, data, rows: parsed.data.length };
}

export function column(table: Table, name: string): number[] {
  const col = table.data.get(name);
  if (!col) {
    throw new ArtifactError(
      `column ${name} not found (have: ${table.columns.join(', ')})`,
    );
  }
  return col;
}

/** Columns matching a tuple-intensity naming pattern, e.g. K1, K2, ... */
export function seriesColumns(table: Table, prefix: string): string[] {
  const re = new RegExp(`^${prefix}\\d+$`);
  return table.columns.filter((c) => re.test(c));
}

export function readJson(path: string): any {
  if (!existsSync(path)) throw new ArtifactError(`no such artifact: ${path}`);
  return JSON.parse(readFileSync(path, 'utf8'));
}

/** Crossing markers from an analyze_crossings.json report. */
export function readCrossings(path: string): { up: number[]; down: number[] } {
  const rep = readJson(path).report;
  if (!rep || !Array.isArray(rep.up) || !Array.isArray(rep.down)) {
    throw new ArtifactError(`${path}: not a crossings report`);
  }
  return { up: rep.up, down: rep.down };
}
