/**
 * Extractive generation with teacher-forced per-step attention.
 *
 * Decoding is grounded: the document block's sentences are ranked by
 * the attention mass they receive in a forward pass over the prompt,
 * and the top sentences are emitted in document order until the token
 * budget runs out. Per-step attention is then recomputed by a single
 * teacher-forced pass over prompt + output, the standard recovery for
 * runtimes that cannot stream attention during sampling; step g's row
 * is the final-layer attention of the last visible position when token
 * g was produced, so it spans exactly contextLength + g - 1 positions.
 */

import { TinyCausalTransformer } from "./model.js";
import { splitSentences, type SentenceUnit } from "./sentences.js";
import { tokenize, type Token } from "./tokenizer.js";

export const DOCUMENT_OPEN = "[DOCUMENT]";
export const DOCUMENT_CLOSE = "[/DOCUMENT]";

/** Char range strictly between the document markers, or null. */
export function locateDocumentBlock(prompt: string): [number, number] | null {
  const openAt = prompt.indexOf(DOCUMENT_OPEN);
  if (openAt < 0) {
    return null;
  }
  const start = openAt + DOCUMENT_OPEN.length;
  const end = prompt.indexOf(DOCUMENT_CLOSE, start);
  if (end < 0) {
    return null;
  }
  return [start, end];
}

export interface StepWeights {
  step: number;
  heads: number;
  length: number;
  data: Float64Array;
}

export interface Generation {
  text: string;
  tokens: Token[];
  inputPositions: number[];
  contextLength: number;
  steps: StepWeights[];
}

/** Mean received attention mass per token over a sentence's positions. */
function sentenceScores(
  sentences: SentenceUnit[],
  promptTokens: Token[],
  docStart: number,
  attentionData: Float64Array,
  heads: number,
  T: number,
): number[] {
  const columnMass = new Float64Array(T);
  for (let h = 0; h < heads; h++) {
    for (let i = 0; i < T; i++) {
      const rowOff = h * T * T + i * T;
      for (let j = 0; j <= i; j++) {
        columnMass[j] += attentionData[rowOff + j];
      }
    }
  }
  return sentences.map((unit) => {
    let mass = 0;
    let count = 0;
    for (let p = 0; p < promptTokens.length; p++) {
      const ts = promptTokens[p].start;
      if (ts >= docStart + unit.charStart && ts < docStart + unit.charEnd) {
        mass += columnMass[p];
        count++;
      }
    }
    return count > 0 ? mass / count : 0;
  });
}

/** Rank descending by score, take whole sentences while the budget
 * lasts (always at least one), then restore document order. */
function selectSentences(
  sentences: SentenceUnit[],
  scores: number[],
  maxNewTokens: number,
): SentenceUnit[] {
  const ranked = sentences
    .slice()
    .sort((a, b) => scores[b.index] - scores[a.index] || a.index - b.index);
  const selected: SentenceUnit[] = [];
  let used = 0;
  for (const unit of ranked) {
    const n = tokenize(unit.text).length;
    if (selected.length > 0 && used + n > maxNewTokens) {
      break;
    }
    selected.push(unit);
    used += n;
  }
  return selected.sort((a, b) => a.index - b.index);
}

export function generate(
  model: TinyCausalTransformer,
  prompt: string,
  maxNewTokens: number,
  inputBoost: number,
): Generation {
  const promptTokens = tokenize(prompt);
  const C = promptTokens.length;
  const block = locateDocumentBlock(prompt);
  const [docStart, docEnd] = block ?? [0, prompt.length];
  const inputPositions: number[] = [];
  for (let i = 0; i < C; i++) {
    const ts = promptTokens[i].start;
    if (ts >= docStart && ts < docEnd) {
      inputPositions.push(i);
    }
  }

  const sentences = splitSentences(prompt.slice(docStart, docEnd));
  if (C === 0 || sentences.length === 0) {
    return { text: "", tokens: [], inputPositions, contextLength: C, steps: [] };
  }

  const bias = new Float64Array(C);
  for (const p of inputPositions) {
    bias[p] = inputBoost;
  }

  const promptAttention = model.attention(
    promptTokens.map((t) => t.text),
    bias,
  );
  const scores = sentenceScores(
    sentences,
    promptTokens,
    docStart,
    promptAttention.data,
    promptAttention.heads,
    C,
  );
  const selected = selectSentences(sentences, scores, maxNewTokens);

  const text = selected.map((u) => u.text).join(" ");
  const outTokens = tokenize(text);
  const G = outTokens.length;

  const jointBias = new Float64Array(C + G);
  jointBias.set(bias);
  const joint = model.attention(
    promptTokens.map((t) => t.text).concat(outTokens.map((t) => t.text)),
    jointBias,
  );
  const H = joint.heads;
  const Tj = joint.tokens;

  const steps: StepWeights[] = [];
  for (let g = 0; g < G; g++) {
    // Token g was predicted from position C + g - 1, which sees
    // exactly the C prompt tokens plus the g tokens emitted before it.
    const row = C + g - 1;
    const length = C + g;
    const data = new Float64Array(H * length);
    for (let h = 0; h < H; h++) {
      const src = h * Tj * Tj + row * Tj;
      for (let j = 0; j < length; j++) {
        data[h * length + j] = joint.data[src + j];
      }
    }
    steps.push({ step: g + 1, heads: H, length, data });
  }

  return { text, tokens: outTokens, inputPositions, contextLength: C, steps };
}
