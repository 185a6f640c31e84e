#!/usr/bin/env node
/**
 * Render one paper-style figure from subwavebands CSV output.
 *
 * Usage: subwavebands-figures --figure fig6 --in fig6.csv --out fig6.svg
 *        subwavebands-figures --figure fig5 --in fig5.csv --bands fig5bands.csv --out fig5.svg
 */

import { render, FIGURE_IDS, FigureSpec } from "./figures.js";
import { EmptyData, SchemaMismatch } from "./errors.js";

export function parseArgs(argv: string[]): FigureSpec {
  let figureId: string | undefined;
  let input: string | undefined;
  let bandsInput: string | undefined;
  let output: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const value = argv[++i];
      if (value === undefined) throw new Error(`missing value for ${arg}`);
      return value;
    };
    switch (arg) {
      case "--figure":
        figureId = next();
        break;
      case "--in":
        input = next();
        break;
      case "--bands":
        bandsInput = next();
        break;
      case "--out":
        output = next();
        break;
      case "--help":
      case "-h":
        throw new Error(
          `usage: subwavebands-figures --figure <id> --in <csv> [--bands <csv>] --out <svg>\n` +
            `figure ids: ${FIGURE_IDS.join(", ")}`,
        );
      default:
        throw new Error(`unknown argument ${arg}`);
    }
  }
  if (!figureId || !input || !output) {
    throw new Error("required: --figure, --in, --out (see --help)");
  }
  return { figureId, input, bandsInput, output };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    render(spec);
  } catch (err) {
    if (err instanceof SchemaMismatch || err instanceof EmptyData) {
      console.error(`${(err as Error).name}: ${(err as Error).message}`);
      return 1;
    }
    console.error((err as Error).message);
    return 1;
  }
  return 0;
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("cli.ts")) {
  process.exit(main(process.argv.slice(2)));
}
