import { describe, expect, it } from "vitest";

import { Rng, fnv1a64, streamKey } from "../src/rng.js";

describe("fnv1a64", () => {
  it("is deterministic and distinguishes nearby strings", () => {
    expect(fnv1a64("abc")).toBe(fnv1a64("abc"));
    expect(fnv1a64("abc")).not.toBe(fnv1a64("abd"));
    expect(fnv1a64("")).toBe(0xcbf29ce484222325n);
  });
});

describe("streamKey", () => {
  it("keeps part boundaries distinct", () => {
    expect(streamKey(0, "ab", "c")).not.toBe(streamKey(0, "a", "bc"));
  });

  it("depends on the seed", () => {
    expect(streamKey(0, "x")).not.toBe(streamKey(1, "x"));
  });
});

describe("Rng", () => {
  it("replays the same stream for the same key", () => {
    const a = new Rng(streamKey(7, "s"));
    const b = new Rng(streamKey(7, "s"));
    for (let i = 0; i < 100; i++) {
      expect(a.uniform()).toBe(b.uniform());
    }
  });

  it("stays in [0, 1)", () => {
    const rng = new Rng(streamKey(3, "u"));
    for (let i = 0; i < 1000; i++) {
      const v = rng.uniform();
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(1);
    }
  });

  it("draws roughly centered normals", () => {
    const rng = new Rng(streamKey(5, "n"));
    const values = rng.normals(4000, 1.0);
    const mean = values.reduce((a, b) => a + b, 0) / values.length;
    const variance =
      values.reduce((a, b) => a + (b - mean) ** 2, 0) / values.length;
    expect(Math.abs(mean)).toBeLessThan(0.1);
    expect(variance).toBeGreaterThan(0.8);
    expect(variance).toBeLessThan(1.2);
    for (const v of values) {
      expect(Number.isFinite(v)).toBe(true);
    }
  });
});
