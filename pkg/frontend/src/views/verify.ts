// Self-verification. Fetches the published prompt, finds the voter's own
// pair with the same normalization the server collates by, and highlights
// the matching rows in the document itself so what the voter attests to is
// exactly what everyone else sees.

import type { AppContext } from "../context.js";
import { clear, el, notice } from "../dom.js";
import type { PromptDoc, Vote } from "../promptdoc.js";
import { VOTES, checkOwnPair, parsePromptText } from "../promptdoc.js";
import { describe } from "./ballot.js";

export function renderVerify(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  if (!ctx.referendumId) {
    root.append(el("p", { text: "Pick a referendum first." }));
    return;
  }
  const referendumId = ctx.referendumId;

  const promptPane = el("pre", { id: "prompt-pane", class: "prompt" });
  const searchResult = el("div", { id: "verify-result" });
  const phraseInput = el("input", {
    id: "verify-phrase",
    placeholder: "your passphrase",
    autocomplete: "off",
  });
  const voteSelect = el("select", { id: "verify-vote" });
  for (const vote of VOTES) {
    voteSelect.append(el("option", { value: vote, text: vote }));
  }

  let doc: PromptDoc | null = null;

  const showPrompt = (current: PromptDoc, highlight: Set<number>) => {
    clear(promptPane);
    current.lines.forEach((line, index) => {
      const node = el("span", { text: line + "\n" });
      if (highlight.has(index)) node.className = "hit";
      promptPane.append(node);
    });
  };

  const search = el("button", { id: "verify-search", type: "button", text: "Check my pair" });
  search.onclick = () => {
    if (!doc) {
      notice(searchResult, "error", "Prompt not loaded yet.");
      return;
    }
    const verdict = checkOwnPair(doc, phraseInput.value, voteSelect.value as Vote);
    if (verdict.kind === "confirmed") {
      showPrompt(doc, new Set(verdict.rows.map((r) => r.lineIndex)));
      const where = verdict.rows
        .map((r) => `${r.vote} #${r.number}`)
        .join(", ");
      notice(searchResult, "ok", `Found with your vote at ${where}. You can attest.`);
    } else if (verdict.kind === "wrong-vote") {
      showPrompt(doc, new Set(verdict.rows.map((r) => r.lineIndex)));
      const listed = verdict.rows.map((r) => r.vote).join(", ");
      notice(
        searchResult,
        "error",
        `Your phrase is listed, but under ${listed}. File a dispute.`,
      );
    } else {
      showPrompt(doc, new Set());
      notice(searchResult, "error", "Your phrase is not in the list. File a dispute.");
    }
  };

  const attestResult = el("div", { id: "attest-result" });
  const attest = el("button", { id: "verify-attest", type: "button", text: "Attest: I checked" });
  attest.onclick = async () => {
    if (!ctx.session) {
      notice(attestResult, "error", "Sign in first (top right).");
      return;
    }
    try {
      await ctx.client.recordVerification(referendumId, true);
      notice(attestResult, "ok", "Attestation recorded.");
    } catch (err) {
      notice(attestResult, "error", describe(err));
    }
  };

  root.append(
    el("section", {},
      el("h2", { text: "Find your pair" }),
      el("div", { class: "field" }, el("label", { text: "Passphrase" }), phraseInput),
      el("div", { class: "field" }, el("label", { text: "Your vote" }), voteSelect),
      search,
      searchResult,
    ),
    el("section", {},
      el("h2", { text: "Published list" }),
      promptPane,
    ),
    el("section", {},
      el("h2", { text: "Attest" }),
      el("p", {
        class: "hint",
        text: "Attesting says only that you checked. It reveals nothing about your ballot.",
      }),
      attest,
      attestResult,
    ),
  );

  ctx.client
    .promptText(referendumId)
    .then((text) => {
      doc = parsePromptText(text);
      showPrompt(doc, new Set());
    })
    .catch((err) => {
      promptPane.textContent = "";
      notice(searchResult, "error", describe(err));
    });
}
