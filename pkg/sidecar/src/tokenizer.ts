/**
 * Tokenization with exact character offsets.
 *
 * The model tokenizes on whitespace boundaries; every token is a
 * substring of its source text addressed by (start, end) so clients
 * can map attention positions back to characters. Entailment checking
 * uses a separate lowercased alphanumeric word stream.
 */

export interface Token {
  text: string;
  start: number;
  end: number;
}

/** Whitespace-delimited tokens with char offsets, in order. */
export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  const re = /\S+/g;
  let m: RegExpExecArray | null;
  while ((m = re.exec(text)) !== null) {
    tokens.push({ text: m[0], start: m.index, end: m.index + m[0].length });
  }
  return tokens;
}

/** Lowercased alphanumeric word tokens with char offsets. */
export function wordTokens(text: string): Token[] {
  const tokens: Token[] = [];
  const re = /[a-z0-9]+/g;
  const lowered = text.toLowerCase();
  let m: RegExpExecArray | null;
  while ((m = re.exec(lowered)) !== null) {
    tokens.push({ text: m[0], start: m.index, end: m.index + m[0].length });
  }
  return tokens;
}
