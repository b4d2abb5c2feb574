#!/usr/bin/env node
import { parseArgs } from "node:util";

import { DataError } from "./csv.js";
import { buildFigure, FIGURE_IDS, FigureId, render } from "./figures.js";

const USAGE = `usage: chainqsd-plot <run-dir> --figure ${FIGURE_IDS.join("|")} --out <file.svg>

Renders a multi-panel figure from a chainqsd run directory.
Exit codes: 0 rendered, 1 bad arguments or unreadable run directory,
2 rendered with missing/invalid series (panels annotated).`;

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        figure: { type: "string" },
        out: { type: "string" },
        help: { type: "boolean", default: false },
      },
    });
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    console.error(USAGE);
    return 1;
  }
  if (parsed.values.help) {
    console.log(USAGE);
    return 0;
  }
  const dir = parsed.positionals[0];
  const figure = parsed.values.figure;
  const out = parsed.values.out;
  if (!dir || !figure || !out) {
    console.error(USAGE);
    return 1;
  }
  if (!FIGURE_IDS.includes(figure as FigureId)) {
    console.error(`unknown figure '${figure}' (expected ${FIGURE_IDS.join(", ")})`);
    return 1;
  }

  try {
    const spec = buildFigure(dir, figure as FigureId);
    const result = render(spec, out);
    if (result.panelErrors.length > 0) {
      for (const e of result.panelErrors) console.error(`panel error: ${e}`);
      console.error(`wrote ${result.path} with ${result.panelErrors.length} annotated panel(s)`);
      return 2;
    }
    console.log(`wrote ${result.path} (${spec.rows}x${spec.cols} panels)`);
    return 0;
  } catch (err) {
    if (err instanceof DataError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

// invoked directly, not imported by tests
if (process.argv[1] && /cli\.js$/.test(process.argv[1])) {
  process.exit(main(process.argv.slice(2)));
}
