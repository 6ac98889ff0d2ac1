/**
 * Minimal deterministic SVG assembly: fixed canvas size, fixed fonts, no
 * randomness, so identical inputs serialize to identical files.
 */

export interface Box {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

const FONT = 'font-family="Helvetica,Arial,sans-serif"';

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1; // degenerate domains map to the range midpoint
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

export function extent(values: number[], pad = 0): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const m = (hi - lo) * pad;
  return [lo - m, hi + m];
}

const fmt = (v: number) => {
  const s = v.toPrecision(4);
  return s.includes('.') ? s.replace(/\.?0+$/, '') : s;
};
const px = (v: number) => v.toFixed(2);

export function polyline(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  stroke: string,
  width = 1.2,
): string {
  const pts = xs.map((x, i) => `${px(sx(x))},${px(sy(ys[i]!))}`).join(' ');
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`;
}

export function circles(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  fill: string,
  r = 1.6,
): string {
  return xs
    .map((x, i) => `<circle cx="${px(sx(x))}" cy="${px(sy(ys[i]!))}" r="${r}" fill="${fill}"/>`)
    .join('\n');
}

export function vline(x: number, box: Box, sx: Scale, stroke: string, dash = '4 3'): string {
  const X = px(sx(x));
  return `<line x1="${X}" y1="${px(box.y)}" x2="${X}" y2="${px(box.y + box.h)}" stroke="${stroke}" stroke-width="1" stroke-dasharray="${dash}"/>`;
}

function ticks(lo: number, hi: number, n = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= n; i++) out.push(lo + ((hi - lo) * i) / n);
  return out;
}

/** Frame, tick marks and labels around a plot area. */
export function axes(box: Box, sx: Scale, sy: Scale, xlabel: string, ylabel: string): string {
  const parts: string[] = [
    `<rect x="${px(box.x)}" y="${px(box.y)}" width="${px(box.w)}" height="${px(box.h)}" fill="none" stroke="#333" stroke-width="1"/>`,
  ];
  for (const t of ticks(sx.domain[0], sx.domain[1])) {
    const X = px(sx(t));
    const y0 = box.y + box.h;
    parts.push(`<line x1="${X}" y1="${px(y0)}" x2="${X}" y2="${px(y0 + 4)}" stroke="#333"/>`);
    parts.push(
      `<text x="${X}" y="${px(y0 + 16)}" ${FONT} font-size="10" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(sy.domain[0], sy.domain[1], 4)) {
    const Y = px(sy(t));
    parts.push(`<line x1="${px(box.x - 4)}" y1="${Y}" x2="${px(box.x)}" y2="${Y}" stroke="#333"/>`);
    parts.push(
      `<text x="${px(box.x - 7)}" y="${Y}" ${FONT} font-size="10" text-anchor="end" dominant-baseline="middle">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${px(box.x + box.w / 2)}" y="${px(box.y + box.h + 32)}" ${FONT} font-size="12" text-anchor="middle">${xlabel}</text>`,
  );
  parts.push(
    `<text x="${px(box.x - 38)}" y="${px(box.y + box.h / 2)}" ${FONT} font-size="12" text-anchor="middle" transform="rotate(-90 ${px(box.x - 38)} ${px(box.y + box.h / 2)})">${ylabel}</text>`,
  );
  return parts.join('\n');
}

export function title(box: Box, text: string): string {
  return `<text x="${px(box.x + box.w / 2)}" y="${px(box.y - 8)}" ${FONT} font-size="13" text-anchor="middle">${text}</text>`;
}

export function document(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    '</svg>',
    '',
  ].join('\n');
}
