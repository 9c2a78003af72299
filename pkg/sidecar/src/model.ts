/**
 * A tiny decoder-only transformer with deterministic seeded weights.
 *
 * The service exposes this model's genuine attention surfaces: every
 * tensor returned over the wire is the post-softmax weight matrix of
 * the final layer's causal multi-head self-attention, computed by a
 * full forward pass (embeddings, LayerNorm, MHA, GELU MLP, residuals).
 *
 * There is no pretrained checkpoint: weights are drawn once per
 * (seed, parameter name) from a splitmix64 stream, so two processes
 * with the same seed serve bit-identical attention. Token embeddings
 * are hashed from the token string, which gives an open vocabulary
 * without a vocab file.
 *
 * An optional additive key-position bias is applied before every
 * softmax (the ALiBi trick, aimed at grounding instead of recency):
 * callers boost the document block so generation attends to source
 * material the way a summarization-tuned model would.
 */

import { Rng, streamKey } from "./rng.js";

export interface ModelConfig {
  dModel: number;
  heads: number;
  layers: number;
  mlpDim: number;
  seed: number;
}

export const DEFAULT_CONFIG: Omit<ModelConfig, "seed"> = {
  dModel: 64,
  heads: 4,
  layers: 2,
  mlpDim: 256,
};

/** Final-layer attention, head-major: data[h*T*T + i*T + j]. */
export interface AttentionResult {
  heads: number;
  tokens: number;
  data: Float64Array;
}

function gelu(x: number): number {
  // tanh approximation from the GPT-2 reference implementation
  return 0.5 * x * (1 + Math.tanh(0.7978845608028654 * (x + 0.044715 * x ** 3)));
}

/** In-place LayerNorm over each row of a (T, d) matrix. */
function layerNorm(x: Float64Array, rows: number, d: number): Float64Array {
  const out = new Float64Array(rows * d);
  for (let i = 0; i < rows; i++) {
    const off = i * d;
    let mean = 0;
    for (let k = 0; k < d; k++) {
      mean += x[off + k];
    }
    mean /= d;
    let variance = 0;
    for (let k = 0; k < d; k++) {
      const c = x[off + k] - mean;
      variance += c * c;
    }
    variance /= d;
    const inv = 1 / Math.sqrt(variance + 1e-5);
    for (let k = 0; k < d; k++) {
      out[off + k] = (x[off + k] - mean) * inv;
    }
  }
  return out;
}

/** y = x @ w for x (rows, dIn) and w (dIn, dOut). */
function matmul(
  x: Float64Array,
  w: Float64Array,
  rows: number,
  dIn: number,
  dOut: number,
): Float64Array {
  const y = new Float64Array(rows * dOut);
  for (let i = 0; i < rows; i++) {
    const xOff = i * dIn;
    const yOff = i * dOut;
    for (let k = 0; k < dIn; k++) {
      const xv = x[xOff + k];
      if (xv === 0) {
        continue;
      }
      const wOff = k * dOut;
      for (let j = 0; j < dOut; j++) {
        y[yOff + j] += xv * w[wOff + j];
      }
    }
  }
  return y;
}

interface LayerWeights {
  wq: Float64Array;
  wk: Float64Array;
  wv: Float64Array;
  wo: Float64Array;
  mlpIn: Float64Array;
  mlpOut: Float64Array;
}

export class TinyCausalTransformer {
  readonly config: ModelConfig;
  private readonly layerWeights: LayerWeights[];
  private readonly embeddingCache = new Map<string, Float64Array>();

  constructor(config: ModelConfig) {
    if (config.dModel % config.heads !== 0) {
      throw new Error("dModel must be divisible by heads");
    }
    this.config = config;
    this.layerWeights = [];
    for (let layer = 0; layer < config.layers; layer++) {
      this.layerWeights.push({
        wq: this.initMatrix(`layer${layer}.wq`, config.dModel, config.dModel),
        wk: this.initMatrix(`layer${layer}.wk`, config.dModel, config.dModel),
        wv: this.initMatrix(`layer${layer}.wv`, config.dModel, config.dModel),
        wo: this.initMatrix(`layer${layer}.wo`, config.dModel, config.dModel),
        mlpIn: this.initMatrix(`layer${layer}.mlp_in`, config.dModel, config.mlpDim),
        mlpOut: this.initMatrix(`layer${layer}.mlp_out`, config.mlpDim, config.dModel),
      });
    }
  }

  private initMatrix(name: string, dIn: number, dOut: number): Float64Array {
    const rng = new Rng(streamKey(this.config.seed, "weights", name));
    return rng.normals(dIn * dOut, 1 / Math.sqrt(dIn));
  }

  /** Hashed open-vocabulary embedding plus sinusoidal position. */
  private embed(tokens: string[]): Float64Array {
    const d = this.config.dModel;
    const x = new Float64Array(tokens.length * d);
    for (let i = 0; i < tokens.length; i++) {
      let vec = this.embeddingCache.get(tokens[i]);
      if (vec === undefined) {
        const rng = new Rng(streamKey(this.config.seed, "embed", tokens[i]));
        vec = rng.normals(d, 1.0);
        this.embeddingCache.set(tokens[i], vec);
      }
      const off = i * d;
      for (let k = 0; k < d; k += 2) {
        const angle = i / Math.pow(10000, k / d);
        x[off + k] = vec[k] + Math.sin(angle);
        if (k + 1 < d) {
          x[off + k + 1] = vec[k + 1] + Math.cos(angle);
        }
      }
    }
    return x;
  }

  /**
   * Full forward pass returning the final layer's causal attention.
   *
   * @param tokens Token strings, one per position.
   * @param keyBias Optional per-position additive pre-softmax bias
   * applied to key positions at every layer (length must be at least
   * tokens.length when given).
   */
  attention(tokens: string[], keyBias?: Float64Array): AttentionResult {
    const T = tokens.length;
    if (T === 0) {
      throw new Error("attention requires at least one token");
    }
    const { dModel: d, heads: H, layers } = this.config;
    const dHead = d / H;
    const scale = 1 / Math.sqrt(dHead);

    let x = this.embed(tokens);
    let finalAttention = new Float64Array(H * T * T);

    for (let layer = 0; layer < layers; layer++) {
      const w = this.layerWeights[layer];
      const ln1 = layerNorm(x, T, d);
      const q = matmul(ln1, w.wq, T, d, d);
      const k = matmul(ln1, w.wk, T, d, d);
      const v = matmul(ln1, w.wv, T, d, d);

      const attnOut = new Float64Array(T * d);
      const isFinal = layer === layers - 1;
      const scores = new Float64Array(T);
      for (let h = 0; h < H; h++) {
        const hOff = h * dHead;
        for (let i = 0; i < T; i++) {
          // Causal: position i sees keys 0..i only.
          let maxScore = -Infinity;
          for (let j = 0; j <= i; j++) {
            let dot = 0;
            for (let c = 0; c < dHead; c++) {
              dot += q[i * d + hOff + c] * k[j * d + hOff + c];
            }
            let s = dot * scale;
            if (keyBias !== undefined) {
              s += keyBias[j];
            }
            scores[j] = s;
            if (s > maxScore) {
              maxScore = s;
            }
          }
          let denom = 0;
          for (let j = 0; j <= i; j++) {
            scores[j] = Math.exp(scores[j] - maxScore);
            denom += scores[j];
          }
          for (let j = 0; j <= i; j++) {
            const weight = scores[j] / denom;
            if (isFinal) {
              finalAttention[h * T * T + i * T + j] = weight;
            }
            for (let c = 0; c < dHead; c++) {
              attnOut[i * d + hOff + c] += weight * v[j * d + hOff + c];
            }
          }
        }
      }

      const projected = matmul(attnOut, w.wo, T, d, d);
      for (let i = 0; i < T * d; i++) {
        x[i] += projected[i];
      }

      const ln2 = layerNorm(x, T, d);
      const hidden = matmul(ln2, w.mlpIn, T, d, this.config.mlpDim);
      for (let i = 0; i < hidden.length; i++) {
        hidden[i] = gelu(hidden[i]);
      }
      const mlpOut = matmul(hidden, w.mlpOut, T, this.config.mlpDim, d);
      for (let i = 0; i < T * d; i++) {
        x[i] += mlpOut[i];
      }
    }

    return { heads: H, tokens: T, data: finalAttention };
  }
}
