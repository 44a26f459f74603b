// Casting. The ballot request itself carries no session header; the token
// is the whole proof of eligibility. Requesting a token does need to be
// signed in, so that half lives behind the shared session.

import { ApiError } from "../api.js";
import type { AppContext } from "../context.js";
import { WARNING_TEXT } from "../context.js";
import { clear, el, notice } from "../dom.js";
import type { Vote } from "../promptdoc.js";
import { VOTES } from "../promptdoc.js";
import { suggestPhrase } from "../wordlist.js";

export function renderBallot(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  if (!ctx.referendumId) {
    root.append(el("p", { text: "Pick a referendum first." }));
    return;
  }
  const referendumId = ctx.referendumId;

  const tokenInput = el("input", {
    id: "ballot-token",
    placeholder: "one-time token",
    autocomplete: "off",
  });
  const phraseInput = el("input", {
    id: "ballot-phrase",
    placeholder: "two ordinary words",
    autocomplete: "off",
  });
  const suggest = el("button", { id: "ballot-suggest", type: "button", text: "Suggest" });
  suggest.onclick = () => {
    phraseInput.value = suggestPhrase();
  };

  const voteRow = el("div", { class: "vote-row" });
  for (const vote of VOTES) {
    const radio = el("input", {
      type: "radio",
      name: "ballot-vote",
      id: `vote-${vote}`,
      value: vote,
    });
    voteRow.append(radio, el("label", { for: `vote-${vote}`, text: vote }));
  }

  const result = el("div", { id: "ballot-result" });
  const submit = el("button", { id: "ballot-submit", type: "button", text: "Cast ballot" });
  submit.onclick = async () => {
    const radios = Array.from(voteRow.querySelectorAll<HTMLInputElement>("input"));
    const picked = radios.find((radio) => radio.checked);
    if (!picked) {
      notice(result, "error", "Pick YES, NO or ABSTAIN.");
      return;
    }
    try {
      const outcome = await ctx.client.castBallot(
        referendumId,
        tokenInput.value.trim(),
        phraseInput.value,
        picked.value as Vote,
      );
      clear(result);
      result.append(
        el("p", {
          class: "notice ok",
          text: "Ballot accepted. Write your passphrase down; you will need it to verify.",
        }),
      );
      for (const code of outcome.warnings) {
        result.append(
          el("p", {
            class: "notice warn",
            text: `Warning ${code}: ${WARNING_TEXT[code] ?? "see the voting guide"}`,
          }),
        );
      }
      tokenInput.value = "";
    } catch (err) {
      notice(result, "error", describe(err));
    }
  };

  const tokenResult = el("div", { id: "token-result" });
  const requestToken = el("button", {
    id: "token-request",
    type: "button",
    text: "Request my token",
  });
  requestToken.onclick = async () => {
    if (!ctx.session) {
      notice(tokenResult, "error", "Sign in first (top right).");
      return;
    }
    try {
      const grant = await ctx.client.issueToken(referendumId);
      tokenInput.value = grant.token;
      notice(
        tokenResult,
        "ok",
        grant.absentee
          ? "Absentee token issued and filled in below. It works once."
          : "Token issued and filled in below. It works once.",
      );
    } catch (err) {
      notice(tokenResult, "error", describe(err));
    }
  };

  const ackResult = el("div", { id: "ack-result" });
  const ack = el("button", {
    id: "absentee-ack",
    type: "button",
    text: "Confirm my absentee ballot",
  });
  ack.onclick = async () => {
    if (!ctx.session) {
      notice(ackResult, "error", "Sign in first (top right).");
      return;
    }
    try {
      await ctx.client.absenteeAck(referendumId);
      notice(ackResult, "ok", "Acknowledged.");
    } catch (err) {
      notice(ackResult, "error", describe(err));
    }
  };

  root.append(
    el("section", {},
      el("h2", { text: "Get a token" }),
      el("p", {
        class: "hint",
        text: "Issued once per voter. The server records that you got one, but never which one.",
      }),
      requestToken,
      tokenResult,
    ),
    el("section", {},
      el("h2", { text: "Cast" }),
      el("div", { class: "field" }, el("label", { text: "Token" }), tokenInput),
      el("div", { class: "field" },
        el("label", { text: "Passphrase" }),
        phraseInput,
        suggest,
      ),
      voteRow,
      submit,
      result,
    ),
    el("section", {},
      el("h2", { text: "Absentee" }),
      el("p", {
        class: "hint",
        text: "If you voted early, confirm before the cutoff that the ballot was yours.",
      }),
      ack,
      ackResult,
    ),
  );
}

export function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.kind}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
