// Filing a claim. Needs a signed-in voter: claims are attributed, unlike
// ballots, because a claimant is asserting something about their own vote.

import type { AppContext } from "../context.js";
import { clear, el, notice } from "../dom.js";
import type { Vote } from "../promptdoc.js";
import { VOTES } from "../promptdoc.js";
import { describe } from "./ballot.js";

export function renderDispute(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  if (!ctx.referendumId) {
    root.append(el("p", { text: "Pick a referendum first." }));
    return;
  }
  const referendumId = ctx.referendumId;

  const phraseInput = el("input", {
    id: "dispute-phrase",
    placeholder: "your passphrase",
    autocomplete: "off",
  });
  const voteSelect = el("select", { id: "dispute-vote" });
  for (const vote of VOTES) {
    voteSelect.append(el("option", { value: vote, text: vote }));
  }
  const secretInput = el("input", {
    id: "dispute-secret",
    placeholder: "commitment secret (optional)",
    autocomplete: "off",
  });

  const result = el("div", { id: "dispute-result" });
  const file = el("button", { id: "dispute-file", type: "button", text: "File claim" });
  file.onclick = async () => {
    if (!ctx.session) {
      notice(result, "error", "Sign in first (top right).");
      return;
    }
    const vote = voteSelect.value as Vote;
    const secret = secretInput.value;
    try {
      const filed = await ctx.client.fileDispute(
        referendumId,
        phraseInput.value,
        vote,
        secret ? { secret, vote } : undefined,
      );
      notice(result, "ok", `Claim ${filed.claim_id} filed. The panel will classify it.`);
    } catch (err) {
      notice(result, "error", describe(err));
    }
  };

  root.append(
    el("section", {},
      el("h2", { text: "Dispute" }),
      el("p", {
        class: "hint",
        text:
          "Use this when your phrase is missing from the published list or shows " +
          "a vote you did not cast. Open during the dispute window.",
      }),
      el("div", { class: "field" }, el("label", { text: "Passphrase" }), phraseInput),
      el("div", { class: "field" }, el("label", { text: "Vote you cast" }), voteSelect),
      el("div", { class: "field" }, el("label", { text: "Proof" }), secretInput),
      el("p", {
        class: "hint",
        text:
          "If you registered a commitment before voting, the secret proves the " +
          "claim instead of asserting it.",
      }),
      file,
      result,
    ),
  );
}
