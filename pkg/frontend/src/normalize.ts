// Phrase comparison must agree with the server byte for byte, or a voter
// could fail to find a pair the server would have matched. The server's
// canonical form is: NFC, full case folding, NFC again, whitespace collapsed
// to single spaces.

import { FOLD_EXCEPTIONS } from "./foldtable.js";

// The server treats exactly these code points as whitespace. Deliberately
// not \s: that class includes U+FEFF, which the server does not split on.
const WS_RUN = new RegExp(
  "[\\t\\n\\v\\f\\r\\u001c-\\u001f \\u0085\\u00a0\\u1680" +
    "\\u2000-\\u200a\\u2028\\u2029\\u202f\\u205f\\u3000]+",
);

export function foldCase(text: string): string {
  let out = "";
  for (const ch of text) {
    const folded = FOLD_EXCEPTIONS.get(ch.codePointAt(0)!);
    out += folded !== undefined ? folded : ch.toLowerCase();
  }
  return out;
}

export function normalizePhrase(text: string): string {
  const folded = foldCase(text.normalize("NFC")).normalize("NFC");
  return folded
    .split(WS_RUN)
    .filter((word) => word !== "")
    .join(" ");
}

/** True when two phrases are the same ballot tag. */
export function samePhrase(a: string, b: string): boolean {
  return normalizePhrase(a) === normalizePhrase(b);
}
