import { describe, expect, it } from "vitest";
import { WORDS, suggestPhrase } from "../src/wordlist.js";

describe("wordlist", () => {
  it("carries enough simple lowercase words", () => {
    expect(WORDS.length).toBeGreaterThanOrEqual(100);
    for (const word of WORDS) {
      expect(word).toMatch(/^[a-z]+$/);
      expect(word.length).toBeGreaterThanOrEqual(3);
    }
  });

  it("has no duplicates", () => {
    expect(new Set(WORDS).size).toBe(WORDS.length);
  });
});

describe("suggestPhrase", () => {
  it("draws two words from the list", () => {
    const phrase = suggestPhrase();
    const parts = phrase.split(" ");
    expect(parts).toHaveLength(2);
    expect(WORDS).toContain(parts[0]);
    expect(WORDS).toContain(parts[1]);
  });

  it("is deterministic under an injected rng", () => {
    const values = [0.25, 0.75];
    let at = 0;
    const rng = () => values[at++ % values.length];
    const first = suggestPhrase(rng);
    at = 0;
    const second = suggestPhrase(rng);
    expect(first).toBe(second);
    expect(first).toBe(
      `${WORDS[Math.floor(0.25 * WORDS.length)]} ${WORDS[Math.floor(0.75 * WORDS.length)]}`,
    );
  });

  it("varies across draws", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 50; i++) seen.add(suggestPhrase());
    expect(seen.size).toBeGreaterThan(10);
  });
});
