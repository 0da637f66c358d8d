/** CLI: `render <kind> --out fig.png input.csv [...]` */

import { FigureKind, FigureSpec, render } from "./figures.js";

function usage(): never {
  process.stderr.write(
    "usage: render <divergence-fit|stabilization|trend|qq|trace> " +
      "--out FIG.png [--digest HEX] [--title TEXT] INPUT.csv [...]\n",
  );
  process.exit(64);
}

export function main(argv: string[]): number {
  if (argv.length < 1) usage();
  const kind = argv[0] as FigureKind;
  let out = "";
  let digest: string | undefined;
  let title: string | undefined;
  const inputs: string[] = [];
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out") out = argv[++i];
    else if (a === "--digest") digest = argv[++i];
    else if (a === "--title") title = argv[++i];
    else inputs.push(a);
  }
  if (!out || inputs.length === 0) usage();
  const spec: FigureSpec = { kind, inputs, output: out, expectedDigest: digest, title };
  try {
    const record = render(spec);
    process.stdout.write(JSON.stringify(record) + "\n");
    return 0;
  } catch (err) {
    process.stderr.write(`render failed: ${(err as Error).message}\n`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
