/**
 * Lexical entailment and targeted revision.
 *
 * The seeded model has no instruction-following ability, so the
 * /v1/entail and /v1/revise endpoints implement the strict-entailment
 * protocol directly: a span is entailed only when every content word
 * appears somewhere in the source document, and revision deletes
 * flagged sentences that fail that test while leaving every other
 * sentence byte-identical.
 */

import { normalizeSpan, splitSentences } from "./sentences.js";
import { wordTokens, type Token } from "./tokenizer.js";

const STOPWORDS = new Set(
  (
    "a an the and or but nor of in on at to for with without from by as is are " +
    "was were be been being has have had do does did he she it they his her " +
    "its their this that these those there here no not any all some such then " +
    "than so if s t"
  ).split(" "),
);

export interface Verdict {
  label: "Entailed" | "Not Entailed";
  explanation: string;
  problematic_spans: string[];
  score: number;
}

/** Longest contiguous phrase whose content words are all absent from the
 * document; stopwords neither support nor break a run. Ties go to the
 * earliest run. */
function longestUnsupportedPhrase(
  span: string,
  words: Token[],
  docVocab: Set<string>,
): string {
  const runs: Array<[number, number]> = [];
  let runStart: number | null = null;
  let runEnd = 0;
  for (const { text, start, end } of words) {
    if (STOPWORDS.has(text)) {
      continue;
    }
    if (docVocab.has(text)) {
      if (runStart !== null) {
        runs.push([runStart, runEnd]);
        runStart = null;
      }
    } else {
      if (runStart === null) {
        runStart = start;
      }
      runEnd = end;
    }
  }
  if (runStart !== null) {
    runs.push([runStart, runEnd]);
  }
  let best = runs[0];
  for (const run of runs.slice(1)) {
    if (run[1] - run[0] > best[1] - best[0]) {
      best = run;
    }
  }
  return span.slice(best[0], best[1]);
}

/** Strict lexical entailment of span against document. */
export function entail(document: string, span: string): Verdict {
  const docVocab = new Set(wordTokens(document).map((t) => t.text));
  const words = wordTokens(span);
  const content = words.filter((t) => !STOPWORDS.has(t.text));
  if (content.length === 0) {
    return {
      label: "Entailed",
      explanation: "The span carries no content tokens to check.",
      problematic_spans: [],
      score: 1.0,
    };
  }
  const supported = content.filter((t) => docVocab.has(t.text)).length;
  const score = supported / content.length;
  if (supported === content.length) {
    return {
      label: "Entailed",
      explanation: "Every content token appears in the document.",
      problematic_spans: [],
      score,
    };
  }
  const phrase = longestUnsupportedPhrase(span, words, docVocab);
  return {
    label: "Not Entailed",
    explanation: `The document does not support "${phrase}".`,
    problematic_spans: [phrase],
    score,
  };
}

/** Delete flagged sentences that the document does not entail; keep
 * everything else, including flagged sentences that turn out to be
 * supported. */
export function revise(
  document: string,
  summary: string,
  flaggedSpans: string[],
): string {
  if (flaggedSpans.length === 0) {
    throw new Error("revise requires at least one flagged span");
  }
  const flagged = new Set(flaggedSpans.map(normalizeSpan));
  const kept: string[] = [];
  for (const unit of splitSentences(summary)) {
    if (flagged.has(normalizeSpan(unit.text))) {
      if (entail(document, unit.text).label === "Not Entailed") {
        continue;
      }
    }
    kept.push(unit.text);
  }
  return kept.join(" ");
}
