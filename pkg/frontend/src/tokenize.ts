// Client-side mirror of the pipeline's tokenizer: maximal runs of
// alphanumeric code points, every other non-whitespace code point on its
// own. Span edits snap to these token edges, which is what keeps reviewer
// output aligned for training.

export interface Token {
  surface: string;
  start: number; // code points
  end: number;
}

const ALNUM = /[\p{L}\p{N}]/u;
const SPACE = /\s/u;

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  let runStart = -1;
  let runText = '';
  let cp = 0;
  for (const ch of text) {
    if (ALNUM.test(ch)) {
      if (runStart < 0) {
        runStart = cp;
        runText = '';
      }
      runText += ch;
    } else {
      if (runStart >= 0) {
        tokens.push({ surface: runText, start: runStart, end: cp });
        runStart = -1;
      }
      if (!SPACE.test(ch)) {
        tokens.push({ surface: ch, start: cp, end: cp + 1 });
      }
    }
    cp += 1;
  }
  if (runStart >= 0) {
    tokens.push({ surface: runText, start: runStart, end: cp });
  }
  return tokens;
}

/** Token index whose range contains the offset, or -1. */
export function tokenAt(tokens: Token[], cpOffset: number): number {
  return tokens.findIndex((t) => t.start <= cpOffset && cpOffset < t.end);
}

/** Smallest token range [first, last] covering [startCp, endCp), or null
 * when the range touches no token (e.g. whitespace only). */
export function coveringTokens(
  tokens: Token[],
  startCp: number,
  endCp: number,
): { first: number; last: number } | null {
  let first = -1;
  let last = -1;
  tokens.forEach((token, i) => {
    if (token.end > startCp && token.start < endCp) {
      if (first < 0) first = i;
      last = i;
    }
  });
  return first < 0 ? null : { first, last };
}
