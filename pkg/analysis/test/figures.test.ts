import * as fs from "node:fs";
import * as path from "node:path";
import * as os from "node:os";
import { afterAll, describe, expect, it } from "vitest";

import { DigestMismatchError, SchemaError, render, sidecarPath } from "../src/figures.js";
import { parseCsv, sharedDigest } from "../src/csv.js";
import { fitWithBootstrap, median, normalQuantile, ols } from "../src/stats.js";
import { Canvas } from "../src/png.js";

const FIXTURES = path.join(__dirname, "fixtures");
const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "phi4fig-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

const out = (name: string) => path.join(tmp, name);
const fixture = (name: string) => path.join(FIXTURES, name);

describe("statistics", () => {
  it("ols recovers an exact line", () => {
    const { slope, intercept, r2 } = ols([1, 2, 3, 4], [3, 5, 7, 9]);
    expect(slope).toBeCloseTo(2, 12);
    expect(intercept).toBeCloseTo(1, 12);
    expect(r2).toBeCloseTo(1, 12);
  });

  it("bootstrap interval covers an exact slope tightly", () => {
    const x = [0, 1, 2, 3];
    const y = x.map((v) => 2.5 * v - 1);
    const fit = fitWithBootstrap(x, y);
    expect(fit.slopeCi[0]).toBeLessThanOrEqual(2.5);
    expect(fit.slopeCi[1]).toBeGreaterThanOrEqual(2.5);
    expect(fit.slopeCi[1] - fit.slopeCi[0]).toBeLessThan(1e-9);
  });

  it("median and normal quantile behave", () => {
    expect(median([3, 1, 2])).toBe(2);
    expect(median([4, 1, 2, 3])).toBe(2.5);
    expect(normalQuantile(0.5)).toBeCloseTo(0, 8);
    expect(normalQuantile(0.975)).toBeCloseTo(1.95996, 4);
  });
});

describe("csv layer", () => {
  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(SchemaError);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(SchemaError);
  });

  it("rejects mixed digests", () => {
    const t = parseCsv(fs.readFileSync(fixture("digest_mismatch.csv"), "utf8"));
    expect(() => sharedDigest([t])).toThrow(DigestMismatchError);
  });
});

describe("png writer", () => {
  it("emits a valid signature and is deterministic", () => {
    const draw = () => {
      const c = new Canvas(64, 48);
      c.line(0, 0, 63, 47, [255, 0, 0, 255]);
      c.text(2, 2, "slope=1.00", [0, 0, 0, 255]);
      return c.encode();
    };
    const a = draw();
    const b = draw();
    expect(a.subarray(0, 8)).toEqual(Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]));
    expect(a.equals(b)).toBe(true);
  });
});

describe("figure kinds on golden inputs", () => {
  it("divergence-fit reproduces the c0 power law", () => {
    const rec = render({
      kind: "divergence-fit",
      inputs: [fixture("golden_c0_ladder.csv")],
      output: out("c0.png"),
    });
    expect(fs.existsSync(out("c0.png"))).toBe(true);
    const sidecar = JSON.parse(fs.readFileSync(sidecarPath(out("c0.png")), "utf8"));
    expect(sidecar.kind).toBe("divergence-fit");
    expect(rec.slope as number).toBeGreaterThan(0.85);
    expect(rec.slope as number).toBeLessThan(1.15);
  });

  it("synthetic exact power law recovers slope 1.00", () => {
    const rec = render({
      kind: "divergence-fit",
      inputs: [fixture("synthetic_slope1.csv")],
      output: out("synthetic.png"),
    });
    expect(rec.slope as number).toBeCloseTo(1.0, 9);
    const ci = rec.slopeCi as [number, number];
    expect(ci[0]).toBeLessThanOrEqual(1.0);
    expect(ci[1]).toBeGreaterThanOrEqual(1.0);
  });

  it("stabilization renders dashboard medians", () => {
    const rec = render({
      kind: "stabilization",
      inputs: [fixture("golden_dashboard.csv")],
      output: out("dash.png"),
    });
    expect((rec.entries as string[]).length).toBeGreaterThan(5);
    expect(fs.existsSync(sidecarPath(out("dash.png")))).toBe(true);
  });

  it("trend renders refinement medians", () => {
    const rec = render({
      kind: "trend",
      inputs: [fixture("golden_refinement.csv")],
      output: out("trend.png"),
    });
    expect((rec.levels as string[]).length).toBe(2);
    expect((rec.medians as number[]).every((v) => v > 0)).toBe(true);
  });

  it("qq and trace render from accumulators", () => {
    const qq = render({
      kind: "qq",
      inputs: [fixture("golden_accumulators.csv")],
      output: out("qq.png"),
    });
    expect(qq.worstCentralGap as number).toBeLessThan(1.0);
    const trace = render({
      kind: "trace",
      inputs: [fixture("golden_accumulators.csv")],
      output: out("trace.png"),
    });
    expect((trace.phiIds as string[]).length).toBe(2);
  });

  it("rendering is pixel-identical across runs", () => {
    render({ kind: "trend", inputs: [fixture("golden_refinement.csv")], output: out("t1.png") });
    render({ kind: "trend", inputs: [fixture("golden_refinement.csv")], output: out("t2.png") });
    expect(fs.readFileSync(out("t1.png")).equals(fs.readFileSync(out("t2.png")))).toBe(true);
  });
});

describe("failure modes", () => {
  it("digest-mismatch inputs are rejected and nothing is written", () => {
    const target = out("bad.png");
    expect(() =>
      render({ kind: "divergence-fit", inputs: [fixture("digest_mismatch.csv")], output: target }),
    ).toThrow(DigestMismatchError);
    expect(fs.existsSync(target)).toBe(false);
  });

  it("expected-digest override is enforced", () => {
    expect(() =>
      render({
        kind: "divergence-fit",
        inputs: [fixture("synthetic_slope1.csv")],
        output: out("bad2.png"),
        expectedDigest: "0000000000000000",
      }),
    ).toThrow(DigestMismatchError);
  });

  it("empty stabilization input errors without output", () => {
    const empty = out("empty.csv");
    fs.writeFileSync(empty, "run_id,N,seed,norm_name,value,config_digest\n");
    const target = out("empty.png");
    expect(() =>
      render({ kind: "stabilization", inputs: [empty], output: target }),
    ).toThrow(SchemaError);
    expect(fs.existsSync(target)).toBe(false);
  });

  it("schema mismatch is reported by column name", () => {
    const wrong = out("wrong.csv");
    fs.writeFileSync(wrong, "a,b,config_digest\n1,2,x\n");
    expect(() =>
      render({ kind: "trend", inputs: [wrong], output: out("w.png") }),
    ).toThrow(/n_coarse|missing/);
  });
});
