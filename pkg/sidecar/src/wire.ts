/**
 * Wire encodings for attention tensors.
 *
 * Tensors travel either as nested JSON lists or, when the client asks
 * for "b64f32", as base64 little-endian float32 buffers with an
 * explicit shape. The buffer form is byte-order fixed so decoding is
 * platform independent.
 */

export const B64F32 = "b64f32";

export interface B64Tensor {
  encoding: typeof B64F32;
  shape: number[];
  data: string;
}

export type WireTensor = B64Tensor | unknown[];

export function encodeB64F32(values: Float64Array, shape: number[]): B64Tensor {
  const expected = shape.reduce((a, b) => a * b, 1);
  if (values.length !== expected) {
    throw new Error(`shape ${shape} does not match ${values.length} values`);
  }
  const buf = Buffer.alloc(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(Math.fround(values[i]), i * 4);
  }
  return { encoding: B64F32, shape, data: buf.toString("base64") };
}

function nest(values: Float64Array, shape: number[], offset: number): unknown[] {
  if (shape.length === 1) {
    return Array.from(values.subarray(offset, offset + shape[0]));
  }
  const stride = shape.slice(1).reduce((a, b) => a * b, 1);
  const out: unknown[] = [];
  for (let i = 0; i < shape[0]; i++) {
    out.push(nest(values, shape.slice(1), offset + i * stride));
  }
  return out;
}

/** Encode per the negotiated encoding: b64f32 when asked, else lists. */
export function encodeTensor(
  values: Float64Array,
  shape: number[],
  encoding: string | undefined,
): WireTensor {
  if (encoding === B64F32) {
    return encodeB64F32(values, shape);
  }
  return nest(values, shape, 0);
}

/** Decode a b64f32 payload back to float64 (used by tests). */
export function decodeB64F32(payload: B64Tensor): {
  shape: number[];
  values: Float64Array;
} {
  const buf = Buffer.from(payload.data, "base64");
  const values = new Float64Array(buf.length / 4);
  for (let i = 0; i < values.length; i++) {
    values[i] = buf.readFloatLE(i * 4);
  }
  return { shape: payload.shape, values };
}
