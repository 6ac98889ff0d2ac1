#!/usr/bin/env node
/**
 * figures — render batch figures from simulation artifacts.
 *
 *   figures bumps --input resonant.csv --crossings analyze_crossings.json --out fig.svg
 *   figures activation --input resonant.csv --out fig.svg
 *   figures phase --input reduced.csv --out fig.svg
 *   figures poincare --input poincare.csv --out fig.svg
 *   figures --spec jobs.json          # [{kind, input, out, ...}, ...]
 */

import { readFileSync } from 'node:fs';
import yargs, { type Argv } from 'yargs';
import { hideBin } from 'yargs/helpers';

import { ArtifactError } from './artifacts.js';
import { FigureKind, FigureSpec, render } from './figures.js';

function fromArgs(kind: FigureKind, argv: any): FigureSpec {
  return {
    kind,
    input: argv.input,
    out: argv.out,
    crossings: argv.crossings,
    columns: argv.columns ? String(argv.columns).split(',').filter(Boolean) : undefined,
  };
}

const perKind = (kind: FigureKind) => (y: Argv) =>
  y
    .option('input', { type: 'string', demandOption: true, describe: 'source CSV artifact' })
    .option('out', { type: 'string', demandOption: true, describe: 'output SVG path' })
    .option('columns', { type: 'string', describe: 'comma-separated series columns' })
    .option('crossings', { type: 'string', describe: 'analyze_crossings.json with t_j markers' });

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  const run = (spec: FigureSpec) => {
    const out = render(spec);
    console.log(`${spec.kind}: ${out}`);
  };
  try {
    await yargs(argv)
      .scriptName('figures')
      .command('bumps', 'multi-bump intensity figure', perKind('bumps'), (a) =>
        run(fromArgs('bumps', a)),
      )
      .command('activation', 'per-tuple activation panels', perKind('activation'), (a) =>
        run(fromArgs('activation', a)),
      )
      .command('phase', '(psi, K) phase portrait', perKind('phase'), (a) =>
        run(fromArgs('phase', a)),
      )
      .command('poincare', 'section return scatter', perKind('poincare'), (a) =>
        run(fromArgs('poincare', a)),
      )
      .command(
        '$0',
        'render a batch of figures from a spec file',
        (y) => y.option('spec', { type: 'string', demandOption: true }),
        (a) => {
          const jobs = JSON.parse(readFileSync(a.spec as string, 'utf8'));
          if (!Array.isArray(jobs)) throw new ArtifactError('spec file must hold a list of jobs');
          for (const job of jobs) run(job as FigureSpec);
        },
      )
      .strict()
      .fail((msg, err) => {
        throw err ?? new ArtifactError(msg ?? 'bad arguments');
      })
      .parseAsync();
  } catch (e) {
    console.error(`error: ${e instanceof Error ? e.message : e}`);
    failed = true;
  }
  return failed ? 2 : 0;
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
