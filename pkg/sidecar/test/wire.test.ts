import { describe, expect, it } from "vitest";

import { decodeB64F32, encodeB64F32, encodeTensor } from "../src/wire.js";

describe("b64f32 encoding", () => {
  it("round-trips values at float32 precision", () => {
    const values = new Float64Array([0.1, 0.25, 1 / 3, 0.99999, 1e-7, 0.5]);
    const payload = encodeB64F32(values, [2, 3]);
    expect(payload.encoding).toBe("b64f32");
    expect(payload.shape).toEqual([2, 3]);
    const { values: decoded } = decodeB64F32(payload);
    for (let i = 0; i < values.length; i++) {
      expect(decoded[i]).toBe(Math.fround(values[i]));
    }
  });

  it("encodes exact float32 values losslessly", () => {
    const values = new Float64Array([0.5, 0.25, 1.0, 0.0]);
    const { values: decoded } = decodeB64F32(encodeB64F32(values, [4]));
    expect(Array.from(decoded)).toEqual(Array.from(values));
  });

  it("is little-endian on the wire", () => {
    const payload = encodeB64F32(new Float64Array([1.0]), [1]);
    expect(Buffer.from(payload.data, "base64")).toEqual(
      Buffer.from([0x00, 0x00, 0x80, 0x3f]),
    );
  });

  it("rejects a shape that disagrees with the value count", () => {
    expect(() => encodeB64F32(new Float64Array(5), [2, 3])).toThrow();
  });
});

describe("encodeTensor", () => {
  it("honors the negotiated b64f32 encoding", () => {
    const out = encodeTensor(new Float64Array([1, 2]), [2], "b64f32");
    expect(out).toHaveProperty("encoding", "b64f32");
  });

  it("falls back to nested lists otherwise", () => {
    const out = encodeTensor(new Float64Array([1, 2, 3, 4, 5, 6]), [2, 3], undefined);
    expect(out).toEqual([
      [1, 2, 3],
      [4, 5, 6],
    ]);
  });
});
