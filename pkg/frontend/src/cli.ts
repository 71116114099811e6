#!/usr/bin/env node
/**
 * Figure scripts for clockdm output files.
 *
 *   clockdm-figures plot-sensitivity --in scan.jsonl [--in more.jsonl]
 *                                    --out fig.svg [--format svg|png|pdf]
 *   clockdm-figures plot-exclusion   --in exclusion.csv [--overlays other.csv]
 *                                    --out fig.svg [--format svg|png|pdf]
 *
 * plot-sensitivity reads the campaign's JSON-lines results directly;
 * plot-exclusion reads the (m_phi_ev, d_e) CSV written by
 * `clockdm export --exclusion` plus an optional overlay CSV of other
 * experiments' curves.
 */

import {
  readExclusionCsv,
  readOverlays,
  readResults,
} from "./data.js";
import {
  exclusionScene,
  Format,
  sensitivityScene,
  writeScene,
} from "./render.js";

interface Args {
  inputs: string[];
  overlays?: string;
  out?: string;
  format: Format;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { inputs: [], format: "svg" };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      i++;
      if (i >= argv.length) throw new Error(`${flag} needs a value`);
      return argv[i];
    };
    if (flag === "--in") args.inputs.push(next());
    else if (flag === "--overlays") args.overlays = next();
    else if (flag === "--out") args.out = next();
    else if (flag === "--format") {
      const fmt = next();
      if (fmt !== "svg" && fmt !== "png" && fmt !== "pdf") {
        throw new Error(`unsupported format "${fmt}" (svg, png or pdf)`);
      }
      args.format = fmt;
    } else throw new Error(`unknown flag ${flag}`);
  }
  if (args.inputs.length === 0) throw new Error("--in is required");
  if (!args.out) throw new Error("--out is required");
  return args;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === "plot-sensitivity") {
      const args = parseArgs(rest);
      const records = args.inputs.flatMap(readResults);
      writeScene(sensitivityScene(records), args.out!, args.format);
      console.log(`wrote ${args.out}`);
      return 0;
    }
    if (command === "plot-exclusion") {
      const args = parseArgs(rest);
      const points = args.inputs.flatMap(readExclusionCsv);
      const overlays = args.overlays ? readOverlays(args.overlays) : [];
      writeScene(exclusionScene(points, overlays), args.out!, args.format);
      console.log(`wrote ${args.out}`);
      return 0;
    }
    console.error(
      "usage: clockdm-figures <plot-sensitivity|plot-exclusion> --in FILE --out FILE [--format svg|png|pdf] [--overlays FILE]",
    );
    return 1;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
