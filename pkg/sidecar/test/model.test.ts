import { describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, TinyCausalTransformer } from "../src/model.js";

const TOKENS = "the patient was admitted with acute chest pain".split(" ");

function makeModel(seed: number): TinyCausalTransformer {
  return new TinyCausalTransformer({ ...DEFAULT_CONFIG, seed });
}

describe("TinyCausalTransformer.attention", () => {
  it("returns a head-major (H, T, T) tensor", () => {
    const att = makeModel(11).attention(TOKENS);
    expect(att.heads).toBe(DEFAULT_CONFIG.heads);
    expect(att.tokens).toBe(TOKENS.length);
    expect(att.data.length).toBe(att.heads * att.tokens * att.tokens);
  });

  it("is causal: no weight on future positions", () => {
    const att = makeModel(11).attention(TOKENS);
    const T = att.tokens;
    for (let h = 0; h < att.heads; h++) {
      for (let i = 0; i < T; i++) {
        for (let j = i + 1; j < T; j++) {
          expect(att.data[h * T * T + i * T + j]).toBe(0);
        }
      }
    }
  });

  it("has row-stochastic weights", () => {
    const att = makeModel(11).attention(TOKENS);
    const T = att.tokens;
    for (let h = 0; h < att.heads; h++) {
      for (let i = 0; i < T; i++) {
        let sum = 0;
        for (let j = 0; j < T; j++) {
          const w = att.data[h * T * T + i * T + j];
          expect(w).toBeGreaterThanOrEqual(0);
          sum += w;
        }
        expect(Math.abs(sum - 1)).toBeLessThan(1e-12);
      }
    }
  });

  it("is deterministic across instances with the same seed", () => {
    const a = makeModel(42).attention(TOKENS);
    const b = makeModel(42).attention(TOKENS);
    expect(Array.from(a.data)).toEqual(Array.from(b.data));
  });

  it("changes with the seed", () => {
    const a = makeModel(1).attention(TOKENS);
    const b = makeModel(2).attention(TOKENS);
    let maxDiff = 0;
    for (let i = 0; i < a.data.length; i++) {
      maxDiff = Math.max(maxDiff, Math.abs(a.data[i] - b.data[i]));
    }
    expect(maxDiff).toBeGreaterThan(1e-3);
  });

  it("degenerates to weight 1 for a single token", () => {
    const att = makeModel(11).attention(["alone"]);
    expect(att.tokens).toBe(1);
    for (let h = 0; h < att.heads; h++) {
      expect(att.data[h]).toBeCloseTo(1, 12);
    }
  });

  it("shifts mass onto key positions boosted by the bias", () => {
    const model = makeModel(11);
    const T = TOKENS.length;
    const bias = new Float64Array(T);
    bias[0] = 6.0;
    const plain = model.attention(TOKENS);
    const boosted = model.attention(TOKENS, bias);
    // Compare total mass landing on position 0 from the last row.
    let before = 0;
    let after = 0;
    for (let h = 0; h < plain.heads; h++) {
      before += plain.data[h * T * T + (T - 1) * T];
      after += boosted.data[h * T * T + (T - 1) * T];
    }
    expect(after).toBeGreaterThan(before);
  });

  it("rejects an empty sequence and a bad head split", () => {
    expect(() => makeModel(0).attention([])).toThrow();
    expect(
      () => new TinyCausalTransformer({ ...DEFAULT_CONFIG, dModel: 65, seed: 0 }),
    ).toThrow();
  });
});
