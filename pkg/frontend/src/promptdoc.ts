// Reader for the published verification prompt. The server renders it in
// one canonical shape; this parser accepts exactly that shape so a page
// that drifted (truncated download, mangled proxy) fails loudly instead of
// quietly showing a voter the wrong rows.

import { normalizePhrase } from "./normalize.js";

export type Vote = "YES" | "NO" | "ABSTAIN";

export const VOTES: readonly Vote[] = ["YES", "NO", "ABSTAIN"];

export interface PromptRow {
  vote: Vote;
  number: number;
  phrase: string;
  /** 0-based index into the prompt's lines, for highlighting. */
  lineIndex: number;
}

export interface PromptDoc {
  referendumId: string;
  rows: PromptRow[];
  tally: Record<Vote, number>;
  lines: string[];
}

const ROW = /^(\d+)\. (.*)$/;

export function parsePromptText(text: string): PromptDoc {
  if (text.includes("\r")) throw new Error("prompt has CR line endings");
  const lines = text.split("\n");
  let at = 0;

  const expect = (want: string) => {
    if (lines[at] !== want) {
      throw new Error(`prompt line ${at + 1}: expected ${JSON.stringify(want)}`);
    }
    at++;
  };

  const header = lines[at] ?? "";
  if (!header.startsWith("Referendum: ")) throw new Error("prompt missing header");
  const referendumId = header.slice("Referendum: ".length);
  at++;

  const rows: PromptRow[] = [];
  for (const vote of VOTES) {
    expect("");
    expect(`${vote}:`);
    let n = 1;
    while (at < lines.length && ROW.test(lines[at])) {
      const m = lines[at].match(ROW)!;
      if (Number(m[1]) !== n) throw new Error(`prompt line ${at + 1}: bad numbering`);
      rows.push({ vote, number: n, phrase: m[2], lineIndex: at });
      n++;
      at++;
    }
  }

  expect("");
  expect("Tally");
  const tally = {} as Record<Vote, number>;
  for (const vote of VOTES) {
    const m = (lines[at] ?? "").match(/^(YES|NO|ABSTAIN): (\d+)$/);
    if (!m || m[1] !== vote) throw new Error(`prompt line ${at + 1}: bad tally row`);
    tally[vote] = Number(m[2]);
    at++;
  }
  // the canonical document ends with one newline, which split renders as a
  // final empty element
  if (at !== lines.length - 1 || lines[at] !== "") {
    throw new Error("prompt has trailing content");
  }

  for (const vote of VOTES) {
    const listed = rows.filter((r) => r.vote === vote).length;
    if (listed !== tally[vote]) {
      throw new Error(`tally for ${vote} says ${tally[vote]}, rows say ${listed}`);
    }
  }
  return { referendumId, rows, tally, lines };
}

/** Every row whose phrase is the given one under canonical comparison. */
export function findPhrase(doc: PromptDoc, phrase: string): PromptRow[] {
  const wanted = normalizePhrase(phrase);
  return doc.rows.filter((row) => normalizePhrase(row.phrase) === wanted);
}

export type Verdict =
  | { kind: "confirmed"; rows: PromptRow[] }
  | { kind: "wrong-vote"; rows: PromptRow[] }
  | { kind: "missing" };

/**
 * What the voter should conclude. A phrase listed several times (a
 * collision) confirms as long as at least one copy carries their vote.
 */
export function checkOwnPair(doc: PromptDoc, phrase: string, vote: Vote): Verdict {
  const rows = findPhrase(doc, phrase);
  if (rows.length === 0) return { kind: "missing" };
  const matching = rows.filter((row) => row.vote === vote);
  if (matching.length > 0) return { kind: "confirmed", rows: matching };
  return { kind: "wrong-vote", rows };
}
