/**
 * The four batch figure kinds rendered from simulation artifacts:
 *
 *   bumps       multi-bump intensity traces with crossing markers t_j, tbar_j
 *   activation  stacked panels, one intensity trace per tuple
 *   phase       (psi, K) portrait of the reduced model with the unperturbed
 *               separatrix overlaid
 *   poincare    section return points as a scatter
 *
 * All output is SVG text; rendering is pure string assembly, so identical
 * inputs give byte-identical files.
 */

import { writeFileSync, mkdirSync } from 'node:fs';
import { dirname } from 'node:path';

import {
  ArtifactError,
  Table,
  column,
  readCrossings,
  readTable,
  seriesColumns,
} from './artifacts.js';
import {
  Box,
  axes,
  circles,
  document as svgDocument,
  extent,
  linearScale,
  polyline,
  title,
  vline,
} from './svg.js';

export type FigureKind = 'bumps' | 'activation' | 'phase' | 'poincare';

export interface FigureSpec {
  kind: FigureKind;
  /** primary CSV artifact (series, reduced trajectory or section points) */
  input: string;
  /** analyze_crossings.json, used by the bumps kind */
  crossings?: string;
  /** explicit series columns; default: all K<i> (bumps/activation) */
  columns?: string[];
  out: string;
}

const WIDTH = 760;
const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#8c564b', '#e377c2'];
const TWO_PI = 2 * Math.PI;

function pickColumns(table: Table, spec: FigureSpec, prefix = 'K'): string[] {
  const cols = spec.columns?.length ? spec.columns : seriesColumns(table, prefix);
  if (!cols.length) throw new ArtifactError(`no ${prefix}* series columns in ${spec.input}`);
  for (const c of cols) column(table, c); // fail early on bad explicit names
  return cols;
}

export function renderBumps(spec: FigureSpec): string {
  const table = readTable(spec.input);
  const t = column(table, 't');
  const cols = pickColumns(table, spec);
  const box: Box = { x: 60, y: 30, w: WIDTH - 90, h: 300 };
  const sx = linearScale(extent(t), [box.x, box.x + box.w]);
  const sy = linearScale([0, 1], [box.y + box.h, box.y]); // intensities live in [0, 1]
  const parts: string[] = [axes(box, sx, sy, 't', 'Q')];
  cols.forEach((c, i) => {
    parts.push(polyline(t, column(table, c), sx, sy, PALETTE[i % PALETTE.length]!));
  });
  if (spec.crossings) {
    const { up, down } = readCrossings(spec.crossings);
    for (const tj of up) parts.push(vline(tj, box, sx, '#2ca02c'));
    for (const tbar of down) parts.push(vline(tbar, box, sx, '#d62728', '2 4'));
  }
  parts.push(title(box, `multi-bump intensity (${cols.join(', ')})`));
  return svgDocument(WIDTH, box.y + box.h + 50, parts.join('\n'));
}

export function renderActivation(spec: FigureSpec): string {
  const table = readTable(spec.input);
  const t = column(table, 't');
  const cols = pickColumns(table, spec);
  const panelH = 130;
  const gap = 42;
  const parts: string[] = [];
  cols.forEach((c, i) => {
    const box: Box = { x: 60, y: 30 + i * (panelH + gap), w: WIDTH - 90, h: panelH };
    const sx = linearScale(extent(t), [box.x, box.x + box.w]);
    const sy = linearScale([0, 1], [box.y + box.h, box.y]);
    parts.push(`<g class="panel" data-series="${c}">`);
    parts.push(axes(box, sx, sy, i === cols.length - 1 ? 't' : '', c));
    parts.push(polyline(t, column(table, c), sx, sy, PALETTE[i % PALETTE.length]!));
    parts.push(title(box, `tuple ${i + 1}`));
    parts.push('</g>');
  });
  const height = 30 + cols.length * (panelH + gap) + 20;
  return svgDocument(WIDTH, height, parts.join('\n'));
}

/** Zero-perturbation separatrix of the reduced cell: the level set
 *  K (1 - K) (1 + 2 cos psi) = 0 inside the cylinder. */
function separatrix(box: Box, sx: (v: number) => number, sy: (v: number) => number): string {
  const psiCrit = [TWO_PI / 3, (2 * TWO_PI) / 3];
  const parts = psiCrit.map((p) => {
    const X = sx(p).toFixed(2);
    return `<line x1="${X}" y1="${sy(0).toFixed(2)}" x2="${X}" y2="${sy(1).toFixed(2)}" stroke="#888" stroke-width="1.4" stroke-dasharray="6 4"/>`;
  });
  for (const K of [0, 1]) {
    const Y = sy(K).toFixed(2);
    parts.push(
      `<line x1="${sx(0).toFixed(2)}" y1="${Y}" x2="${sx(TWO_PI).toFixed(2)}" y2="${Y}" stroke="#888" stroke-width="1.4" stroke-dasharray="6 4"/>`,
    );
  }
  return parts.join('\n');
}

export function renderPhase(spec: FigureSpec): string {
  const table = readTable(spec.input);
  const psi = column(table, spec.columns?.[0] ?? 'psi1');
  const K = column(table, spec.columns?.[1] ?? 'K1');
  const box: Box = { x: 60, y: 30, w: WIDTH - 90, h: 360 };
  const sx = linearScale([0, TWO_PI], [box.x, box.x + box.w]);
  const sy = linearScale([0, 1], [box.y + box.h, box.y]);
  const wrapped = psi.map((p) => ((p % TWO_PI) + TWO_PI) % TWO_PI);
  const parts: string[] = [axes(box, sx, sy, 'psi', 'K'), separatrix(box, sx, sy)];
  // break the trace where the angle wraps so no spurious horizontal chords appear
  let start = 0;
  for (let i = 1; i <= wrapped.length; i++) {
    if (i === wrapped.length || Math.abs(wrapped[i]! - wrapped[i - 1]!) > Math.PI) {
      parts.push(polyline(wrapped.slice(start, i), K.slice(start, i), sx, sy, PALETTE[0]!));
      start = i;
    }
  }
  parts.push(title(box, 'phase portrait'));
  return svgDocument(WIDTH, box.y + box.h + 50, parts.join('\n'));
}

export function renderPoincare(spec: FigureSpec): string {
  const table = readTable(spec.input);
  const psi = column(table, spec.columns?.[0] ?? 'psi1');
  const K = column(table, spec.columns?.[1] ?? 'K1');
  const box: Box = { x: 60, y: 30, w: WIDTH - 90, h: 360 };
  const sx = linearScale(extent(psi, 0.05), [box.x, box.x + box.w]);
  const sy = linearScale([0, 1], [box.y + box.h, box.y]);
  const parts = [
    axes(box, sx, sy, 'psi', 'K'),
    circles(psi, K, sx, sy, PALETTE[1]!),
    title(box, `section returns (${psi.length} points)`),
  ];
  return svgDocument(WIDTH, box.y + box.h + 50, parts.join('\n'));
}

const RENDERERS: Record<FigureKind, (spec: FigureSpec) => string> = {
  bumps: renderBumps,
  activation: renderActivation,
  phase: renderPhase,
  poincare: renderPoincare,
};

export function render(spec: FigureSpec): string {
  const fn = RENDERERS[spec.kind];
  if (!fn) throw new ArtifactError(`unknown figure kind: ${spec.kind}`);
  const svg = fn(spec);
  mkdirSync(dirname(spec.out), { recursive: true });
  writeFileSync(spec.out, svg);
  return spec.out;
}
