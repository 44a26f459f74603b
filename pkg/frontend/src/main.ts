// Shell: referendum picker and session in the header, hash routing for the
// four views. No build-time templates; the server serves this directory
// statically and everything else is API calls.

import { PvvClient } from "./api.js";
import type { AppContext } from "./context.js";
import { clear, el, notice } from "./dom.js";
import { describe, renderBallot } from "./views/ballot.js";
import { renderVerify } from "./views/verify.js";
import { renderDispute } from "./views/dispute.js";
import { renderAdmin } from "./views/admin.js";

type View = (root: HTMLElement, ctx: AppContext) => void;

const ROUTES: Record<string, View> = {
  "#/ballot": renderBallot,
  "#/verify": renderVerify,
  "#/dispute": renderDispute,
  "#/admin": renderAdmin,
};

export function startApp(doc: Document, client?: PvvClient): AppContext {
  const ctx: AppContext = {
    client: client ?? new PvvClient(""),
    session: null,
    referendumId: null,
  };

  const header = doc.querySelector<HTMLElement>("#header")!;
  const viewRoot = doc.querySelector<HTMLElement>("#view")!;

  const refSelect = el("select", { id: "ref-select" });
  refSelect.onchange = () => {
    ctx.referendumId = refSelect.value || null;
    route();
  };

  const sessionBox = el("span", { id: "session-box" });
  const principalInput = el("input", {
    id: "login-principal",
    placeholder: "who are you",
    autocomplete: "off",
  });
  const loginResult = el("span", { id: "login-result" });
  const loginButton = el("button", { id: "login-button", type: "button", text: "Sign in" });

  const paintSession = () => {
    clear(sessionBox);
    if (ctx.session) {
      const out = el("button", { id: "logout-button", type: "button", text: "Sign out" });
      out.onclick = () => {
        ctx.client.logout();
        ctx.session = null;
        paintSession();
        route();
      };
      sessionBox.append(
        el("span", {
          text: `${ctx.session.principal} (${ctx.session.roles.join(", ") || "no roles"}) `,
        }),
        out,
      );
    } else {
      sessionBox.append(principalInput, loginButton, loginResult);
    }
  };

  loginButton.onclick = async () => {
    try {
      ctx.session = await ctx.client.login(principalInput.value.trim());
      loginResult.textContent = "";
      paintSession();
      route();
    } catch (err) {
      loginResult.textContent = " " + describe(err);
    }
  };

  const nav = el("nav", {},
    el("a", { href: "#/ballot", text: "Cast" }),
    el("a", { href: "#/verify", text: "Verify" }),
    el("a", { href: "#/dispute", text: "Dispute" }),
    el("a", { href: "#/admin", text: "Admin" }),
  );

  header.append(
    el("span", { class: "brand", text: "pvv" }),
    nav,
    refSelect,
    sessionBox,
  );
  paintSession();

  const route = () => {
    const view = ROUTES[doc.defaultView?.location.hash || "#/ballot"] ?? renderBallot;
    view(viewRoot, ctx);
  };
  doc.defaultView?.addEventListener("hashchange", route);

  ctx.client
    .listReferenda()
    .then(({ referenda }) => {
      clear(refSelect);
      for (const id of referenda) {
        refSelect.append(el("option", { value: id, text: id }));
      }
      if (referenda.length > 0) {
        ctx.referendumId = referenda[0];
        refSelect.value = referenda[0];
      }
      route();
    })
    .catch((err) => {
      notice(viewRoot, "error", `Could not list referenda: ${describe(err)}`);
    });

  route();
  return ctx;
}

// happy-dom test pages import this module and call startApp themselves
if (typeof document !== "undefined" && document.querySelector("#header")) {
  startApp(document);
}
