/**
 * Rule-based sentence segmentation over clinical-note text.
 *
 * Mirrors the engine's segmentation contract: terminators '.', '?', '!'
 * close a sentence at end of segment or before whitespace + uppercase;
 * a fixed abbreviation list suppresses false splits; blank lines always
 * separate; "<TAG> value" header lines stand alone. Units are trimmed
 * substrings addressed by char offsets into the parent text.
 */

export interface SentenceUnit {
  index: number;
  charStart: number;
  charEnd: number;
  text: string;
}

const ABBREVIATIONS = new Set([
  "dr.", "mr.", "ms.", "mrs.", "vs.", "e.g.", "i.e.", "pt.",
]);

const TERMINATORS = new Set([".", "?", "!"]);

const HEADER_RE = /^\s*<[A-Za-z_][A-Za-z0-9_]*>/;

/** Case-folded, whitespace-collapsed, terminal punctuation stripped. */
export function normalizeSpan(text: string): string {
  const collapsed = text.split(/\s+/).filter(Boolean).join(" ").toLowerCase();
  return collapsed.replace(/[.!?]+$/, "").replace(/\s+$/, "");
}

function isSpace(ch: string): boolean {
  return /\s/.test(ch);
}

function isUpper(ch: string): boolean {
  return ch !== ch.toLowerCase() && ch === ch.toUpperCase();
}

function lineSpans(text: string): Array<[number, number]> {
  const spans: Array<[number, number]> = [];
  let start = 0;
  for (let i = 0; i < text.length; i++) {
    if (text[i] === "\n") {
      spans.push([start, i]);
      start = i + 1;
    }
  }
  spans.push([start, text.length]);
  return spans;
}

/** Header lines alone, plain-line runs merged, blank lines discarded. */
function segments(text: string): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  let run: Array<[number, number]> = [];
  const flush = () => {
    if (run.length > 0) {
      out.push([run[0][0], run[run.length - 1][1]]);
      run = [];
    }
  };
  for (const [a, b] of lineSpans(text)) {
    const line = text.slice(a, b);
    if (line.trim() === "") {
      flush();
    } else if (HEADER_RE.test(line)) {
      flush();
      out.push([a, b]);
    } else {
      run.push([a, b]);
    }
  }
  flush();
  return out;
}

function isAbbreviation(text: string, segStart: number, end: number): boolean {
  const m = /(\S+)$/.exec(text.slice(segStart, end));
  if (m === null) {
    return false;
  }
  const token = m[1].toLowerCase().replace(/^[([{'"]+/, "");
  return ABBREVIATIONS.has(token);
}

/** A terminator run ending just before pos closes a sentence when the
 * segment ends there, or whitespace then an uppercase letter follows. */
function isBoundary(text: string, pos: number, segEnd: number): boolean {
  if (pos >= segEnd) {
    return true;
  }
  if (!isSpace(text[pos])) {
    return false;
  }
  let k = pos;
  while (k < segEnd && isSpace(text[k])) {
    k++;
  }
  return k >= segEnd || isUpper(text[k]);
}

function terminatorSplits(
  text: string,
  a: number,
  b: number,
): Array<[number, number]> {
  const units: Array<[number, number]> = [];
  let start = a;
  let i = a;
  while (i < b) {
    if (TERMINATORS.has(text[i])) {
      let j = i;
      while (j + 1 < b && TERMINATORS.has(text[j + 1])) {
        j++;
      }
      const end = j + 1;
      const singlePeriod = j === i && text[i] === ".";
      if (
        isBoundary(text, end, b) &&
        !(singlePeriod && isAbbreviation(text, a, end))
      ) {
        units.push([start, end]);
        start = end;
      }
      i = end;
    } else {
      i++;
    }
  }
  if (start < b) {
    units.push([start, b]);
  }
  return units;
}

/** Ordered, non-overlapping, trimmed sentence units. */
export function splitSentences(text: string): SentenceUnit[] {
  const units: SentenceUnit[] = [];
  for (const [a, b] of segments(text)) {
    for (let [s, e] of terminatorSplits(text, a, b)) {
      while (s < e && isSpace(text[s])) {
        s++;
      }
      while (e > s && isSpace(text[e - 1])) {
        e--;
      }
      if (s < e) {
        units.push({
          index: units.length,
          charStart: s,
          charEnd: e,
          text: text.slice(s, e),
        });
      }
    }
  }
  return units;
}
