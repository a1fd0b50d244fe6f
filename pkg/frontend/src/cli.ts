#!/usr/bin/env node
/** plot --kind KIND --in CSV [--in CSV ...] --out PNG [--region rk2|euler] */
import { PlotKind, PlotSpec, render } from "./index.js";

export function parseArgs(argv: string[]): PlotSpec {
  let kind: string | undefined;
  let out: string | undefined;
  let region: "rk2" | "euler" | undefined;
  const inputs: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`missing value after ${a}`);
      return argv[++i];
    };
    switch (a) {
      case "--kind":
        kind = next();
        break;
      case "--in":
        inputs.push(next());
        break;
      case "--out":
        out = next();
        break;
      case "--region": {
        const r = next();
        if (r !== "rk2" && r !== "euler") {
          throw new Error(`--region must be rk2 or euler, got '${r}'`);
        }
        region = r;
        break;
      }
      default:
        throw new Error(`unknown argument '${a}'`);
    }
  }
  if (!kind) throw new Error("--kind is required");
  if (!out) throw new Error("--out is required");
  if (inputs.length === 0) throw new Error("at least one --in is required");
  return { kind: kind as PlotKind, inputs, out, region };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const info = render(spec);
    console.log(
      `wrote ${spec.out} (${info.width}x${info.height}, ${info.series} input file(s))`,
    );
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
