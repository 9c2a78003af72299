/**
 * Deterministic 64-bit PRNG utilities.
 *
 * Everything the sidecar computes must be a pure function of
 * (inputs, seed), so all randomness flows through splitmix64 streams
 * keyed by FNV-1a hashes of the relevant strings. No Math.random.
 */

const MASK64 = (1n << 64n) - 1n;

/** FNV-1a 64-bit hash of a UTF-8 string, as an unsigned BigInt. */
export function fnv1a64(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  const bytes = Buffer.from(text, "utf8");
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}

/** Combine a seed with string parts into one 64-bit stream key. */
export function streamKey(seed: number, ...parts: string[]): bigint {
  // 0x1f separators keep ("ab","c") and ("a","bc") distinct.
  let h = fnv1a64(String(seed));
  for (const part of parts) {
    h ^= fnv1a64("\x1f" + part);
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}

function splitmix64(state: bigint): [bigint, bigint] {
  state = (state + 0x9e3779b97f4a7c15n) & MASK64;
  let z = state;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return [z, state];
}

/** Sequential splitmix64 stream yielding float64 values. */
export class Rng {
  private state: bigint;

  constructor(key: bigint) {
    this.state = key & MASK64;
  }

  /** Uniform in [0, 1) with 53 bits of mantissa. */
  uniform(): number {
    const [z, next] = splitmix64(this.state);
    this.state = next;
    return Number(z >> 11n) / 9007199254740992;
  }

  /** Standard normal via Box-Muller (one value per call). */
  normal(): number {
    // u must stay away from 0 for the log; uniform() can return 0.
    const u = this.uniform() + 5e-324;
    const v = this.uniform();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  /** Fill a Float64Array with N(0, scale^2) samples. */
  normals(count: number, scale: number): Float64Array {
    const out = new Float64Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.normal() * scale;
    }
    return out;
  }
}
