// Organizer dashboard: phase control, the running count, publication,
// participation, and the dispute queue. Everything here is a thin line to
// the service; the browser holds no state worth trusting.

import type { ClaimRow } from "../api.js";
import type { AppContext } from "../context.js";
import { clear, el, notice } from "../dom.js";
import { describe } from "./ballot.js";

const PHASES = [
  "Setup",
  "AbsenteeOpen",
  "VotingOpen",
  "VotingClosed",
  "VerificationOpen",
  "VerificationClosed",
  "Reported",
  "DisputeWindow",
  "Final",
];

function nextTargets(current: string): string[] {
  const at = PHASES.indexOf(current);
  if (at < 0 || at === PHASES.length - 1) return [];
  const targets = [PHASES[at + 1]];
  // the absentee stage may be skipped when nobody was approved for it
  if (current === "Setup") targets.push("VotingOpen");
  return targets;
}

export function renderAdmin(root: HTMLElement, ctx: AppContext): void {
  clear(root);
  if (!ctx.referendumId) {
    root.append(el("p", { text: "Pick a referendum first." }));
    return;
  }
  if (!ctx.session) {
    root.append(el("p", { text: "Sign in first (top right)." }));
    return;
  }
  const referendumId = ctx.referendumId;

  const phaseLine = el("p", { id: "admin-phase", class: "phase-line" });
  const phaseButtons = el("div", { id: "admin-phase-buttons" });
  const countLine = el("p", { id: "admin-count" });
  const adminResult = el("div", { id: "admin-result" });
  const participationPane = el("pre", { id: "admin-participation" });
  const claimsPane = el("div", { id: "admin-claims" });
  const chainLine = el("p", { id: "admin-chain" });

  const refresh = async () => {
    try {
      const status = await ctx.client.status(referendumId);
      phaseLine.textContent = `Phase: ${status.phase} (${status.eligible_count} eligible, ${status.absentee_approved_count} absentee-approved)`;
      clear(phaseButtons);
      for (const target of nextTargets(status.phase)) {
        const button = el("button", {
          type: "button",
          class: "phase-btn",
          text: `Advance to ${target}`,
        });
        button.onclick = async () => {
          try {
            await ctx.client.advancePhase(referendumId, target);
            notice(adminResult, "ok", `Now in ${target}.`);
            await refresh();
          } catch (err) {
            notice(adminResult, "error", describe(err));
          }
        };
        phaseButtons.append(button);
      }
      if (status.phase === "VotingClosed" && !status.prompt_published) {
        const publish = el("button", {
          id: "admin-publish",
          type: "button",
          text: "Publish verification prompt",
        });
        publish.onclick = async () => {
          try {
            await ctx.client.publishPrompt(referendumId);
            notice(adminResult, "ok", "Prompt published; voters have been notified.");
            await refresh();
          } catch (err) {
            notice(adminResult, "error", describe(err));
          }
        };
        phaseButtons.append(publish);
      }

      const count = await ctx.client.count(referendumId);
      countLine.textContent = count.tally
        ? `Ballots: ${count.ballots}. Tally: ` +
          Object.entries(count.tally)
            .map(([vote, n]) => `${vote} ${n}`)
            .join(", ")
        : `Ballots so far: ${count.ballots}`;

      const chain = await ctx.client.chainCheck(referendumId);
      chainLine.textContent = chain.ok
        ? "Audit chain: intact"
        : `Audit chain BROKEN at ${chain.first_invalid_index}: ${chain.reason}`;
      chainLine.className = chain.ok ? "notice ok" : "notice error";

      try {
        const part = await ctx.client.participation(referendumId);
        participationPane.textContent = JSON.stringify(part, null, 2);
      } catch {
        participationPane.textContent = "(participation not visible for this role)";
      }

      await refreshClaims();
    } catch (err) {
      notice(adminResult, "error", describe(err));
    }
  };

  const refreshClaims = async () => {
    clear(claimsPane);
    let claims: ClaimRow[];
    try {
      claims = (await ctx.client.disputeQueue(referendumId)).claims;
    } catch {
      claimsPane.append(el("p", { class: "hint", text: "(queue not visible for this role)" }));
      return;
    }
    if (claims.length === 0) {
      claimsPane.append(el("p", { class: "hint", text: "No claims." }));
      return;
    }
    for (const claim of claims) {
      const row = el("div", { class: "claim-row" });
      row.append(
        el("span", {
          text: `${claim.claim_id}: "${claim.passphrase}" claimed ${claim.claimed_vote} `,
        }),
        el("span", {
          text: claim.classification
            ? `[${claim.classification}${claim.applied ? ", applied" : ""}] `
            : "[pending] ",
        }),
      );
      if (!claim.classification) {
        const judge = el("button", { type: "button", text: "Adjudicate" });
        judge.onclick = async () => {
          try {
            const outcome = await ctx.client.adjudicate(referendumId, claim.claim_id);
            notice(adminResult, "ok", `${claim.claim_id}: ${outcome.classification}`);
            await refreshClaims();
          } catch (err) {
            notice(adminResult, "error", describe(err));
          }
        };
        row.append(judge);
      } else if (claim.classification === "ValidCorrectable" && !claim.applied) {
        const apply = el("button", { type: "button", text: "Apply correction" });
        apply.onclick = async () => {
          try {
            await ctx.client.applyCorrection(referendumId, claim.claim_id);
            notice(adminResult, "ok", `${claim.claim_id} applied; prompt re-rendered.`);
            await refreshClaims();
          } catch (err) {
            notice(adminResult, "error", describe(err));
          }
        };
        row.append(apply);
      }
      claimsPane.append(row);
    }
  };

  const reload = el("button", { id: "admin-refresh", type: "button", text: "Refresh" });
  reload.onclick = refresh;

  root.append(
    el("section", {},
      el("h2", { text: "Referendum" }),
      phaseLine,
      countLine,
      chainLine,
      phaseButtons,
      reload,
      adminResult,
    ),
    el("section", {},
      el("h2", { text: "Participation" }),
      participationPane,
    ),
    el("section", {},
      el("h2", { text: "Dispute queue" }),
      claimsPane,
    ),
  );

  void refresh();
}
