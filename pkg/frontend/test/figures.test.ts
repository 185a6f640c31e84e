import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { beforeAll, describe, expect, it } from "vitest";

import { EmptyData, SchemaMismatch } from "../src/errors.js";
import { FIGURE_IDS, render, renderToString } from "../src/figures.js";
import { main } from "../src/cli.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function fixture(name: string): string {
  return join(FIXTURES, name);
}

let outDir: string;
beforeAll(() => {
  outDir = mkdtempSync(join(tmpdir(), "figs-"));
});

describe("preset renders", () => {
  const singleInput = ["fig2a", "fig2b", "fig5bands", "fig3a", "fig3b", "fig6", "fig7", "fig8", "fig7dilute"];

  it.each(singleInput)("renders %s from its preset CSV", (figureId) => {
    const output = join(outDir, `${figureId}.svg`);
    render({ figureId, input: fixture(`${figureId}.csv`), output });
    const svg = readFileSync(output, "utf-8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("</svg>");
    expect(svg.length).toBeGreaterThan(2000);
  });

  it("renders fig5 from the mode CSV plus the band-diagram CSV", () => {
    const output = join(outDir, "fig5.svg");
    render({
      figureId: "fig5",
      input: fixture("fig5.csv"),
      bandsInput: fixture("fig5bands.csv"),
      output,
    });
    const svg = readFileSync(output, "utf-8");
    expect(svg).toContain("interface mode");
    expect(svg).toContain("log scale");
  });

  it("covers every known figure id", () => {
    expect(new Set(FIGURE_IDS)).toEqual(
      new Set([...singleInput, "fig5"]),
    );
  });

  it("is deterministic", () => {
    const a = renderToString({ figureId: "fig2a", input: fixture("fig2a.csv"), output: "unused" });
    const b = renderToString({ figureId: "fig2a", input: fixture("fig2a.csv"), output: "unused" });
    expect(a).toBe(b);
  });
});

describe("refusals", () => {
  it("refuses mismatched preset metadata and writes nothing", () => {
    const output = join(outDir, "mismatch.svg");
    expect(() =>
      render({ figureId: "fig2a", input: fixture("fig2b.csv"), output }),
    ).toThrow(SchemaMismatch);
    expect(existsSync(output)).toBe(false);
  });

  it("refuses a fig5 band input with the wrong preset", () => {
    const output = join(outDir, "mismatch5.svg");
    expect(() =>
      render({
        figureId: "fig5",
        input: fixture("fig5.csv"),
        bandsInput: fixture("fig2b.csv"),
        output,
      }),
    ).toThrow(SchemaMismatch);
    expect(existsSync(output)).toBe(false);
  });

  it("refuses empty data", () => {
    const emptyPath = join(outDir, "empty.csv");
    writeFileSync(emptyPath, "# preset=fig2a\nalpha,beta,branch,omega\n");
    const output = join(outDir, "empty.svg");
    expect(() => render({ figureId: "fig2a", input: emptyPath, output })).toThrow(EmptyData);
    expect(existsSync(output)).toBe(false);
  });

  it("refuses missing columns", () => {
    const badPath = join(outDir, "bad.csv");
    writeFileSync(badPath, "# preset=fig2a\nalpha,beta\n0.0,0.0\n");
    const output = join(outDir, "bad.svg");
    expect(() => render({ figureId: "fig2a", input: badPath, output })).toThrow(SchemaMismatch);
    expect(existsSync(output)).toBe(false);
  });

  it("refuses unknown figure ids", () => {
    expect(() =>
      renderToString({ figureId: "fig99", input: fixture("fig2a.csv"), output: "x" }),
    ).toThrow(SchemaMismatch);
  });
});

describe("cli entry", () => {
  it("renders through the argument parser", () => {
    const output = join(outDir, "cli.svg");
    const code = main(["--figure", "fig7dilute", "--in", fixture("fig7dilute.csv"), "--out", output]);
    expect(code).toBe(0);
    expect(existsSync(output)).toBe(true);
  });

  it("exits 2 on bad arguments", () => {
    expect(main(["--figure", "fig6"])).toBe(2);
    expect(main(["--bogus"])).toBe(2);
  });

  it("exits 1 on schema mismatch", () => {
    const output = join(outDir, "cli-mismatch.svg");
    const code = main(["--figure", "fig6", "--in", fixture("fig7.csv"), "--out", output]);
    expect(code).toBe(1);
    expect(existsSync(output)).toBe(false);
  });
});
