/**
 * Figure renderer command line.
 *
 *   node dist/cli.js render --kind gap-ladder --input gap.csv \
 *       --output ladder.svg [--column L_3] [--linear-y] [--title "..."]
 *
 * Exit codes: 0 ok, 2 unusable input (missing file, empty CSV, missing
 * columns, bad flags).
 */

import { writeFileSync } from "fs";
import { CsvError, readCsv } from "./csv";
import { FIGURE_KINDS, FigureKind, FigureOptions, render } from "./figures";

interface Args {
  kind: FigureKind;
  input: string;
  output: string;
  options: FigureOptions;
}

export function parseArgs(argv: string[]): Args {
  if (argv[0] !== "render") {
    throw new CsvError(`unknown command '${argv[0] ?? ""}' (expected render)`);
  }
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  const options: FigureOptions = {};
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new CsvError(`${flag} needs a value`);
      return argv[++i];
    };
    switch (flag) {
      case "--kind":
        kind = next();
        break;
      case "--input":
        input = next();
        break;
      case "--output":
        output = next();
        break;
      case "--column":
        options.column = next();
        break;
      case "--title":
        options.title = next();
        break;
      case "--linear-y":
        options.logY = false;
        break;
      case "--log-y":
        options.logY = true;
        break;
      default:
        throw new CsvError(`unknown flag '${flag}'`);
    }
  }
  if (!kind || !(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new CsvError(
      `--kind must be one of: ${FIGURE_KINDS.join(", ")}`,
    );
  }
  if (!input || !output) {
    throw new CsvError("--input and --output are required");
  }
  return { kind: kind as FigureKind, input, output, options };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
    const table = readCsv(args.input);
    const svg = render(args.kind, table, args.options);
    writeFileSync(args.output, svg);
  } catch (err) {
    if (err instanceof CsvError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
