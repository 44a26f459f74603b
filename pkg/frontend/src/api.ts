// Thin typed client for the voting service. Paths are root-relative so the
// page works when mounted at /ui on the same origin as the API.

import type { Vote } from "./promptdoc.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface SessionInfo {
  token: string;
  principal: string;
  expires_at: string;
  roles: string[];
}

export interface ReferendumStatus {
  referendum_id: string;
  question: string;
  date: string;
  phase: string;
  eligible_count: number;
  absentee_approved_count: number;
  prompt_published: boolean;
}

export interface CountInfo {
  ballots: number;
  tally: Record<string, number> | null;
}

export interface BallotResult {
  accepted: boolean;
  warnings: string[];
}

export interface TokenGrant {
  token: string;
  absentee: boolean;
}

export interface ChainCheck {
  ok: boolean;
  first_invalid_index: number | null;
  reason: string | null;
}

export interface ClaimRow {
  claim_id: string;
  passphrase: string;
  claimed_vote: string;
  classification: string | null;
  applied: boolean;
}

export interface AdjudicationResult {
  claim_id: string;
  classification: string;
  rationale: string;
}

type Json = Record<string, unknown>;

export class PvvClient {
  sessionToken: string | null = null;

  private readonly fetchFn: typeof fetch;

  constructor(
    private readonly base: string = "",
    fetchFn?: typeof fetch,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(
    method: string,
    path: string,
    body?: Json,
    asText = false,
  ): Promise<any> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.sessionToken) headers["authorization"] = `Bearer ${this.sessionToken}`;
    const response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let kind = "HttpError";
      let detail = `${response.status} ${response.statusText}`;
      try {
        const doc = await response.json();
        if (doc && typeof doc.error === "string") {
          kind = doc.error;
          detail = String(doc.detail ?? detail);
        }
      } catch {
        // non-JSON error body, keep the status line
      }
      throw new ApiError(response.status, kind, detail);
    }
    return asText ? response.text() : response.json();
  }

  async login(principal: string, credential?: string): Promise<SessionInfo> {
    const info: SessionInfo = await this.request("POST", "/auth/session", {
      principal,
      credential: credential ?? null,
    });
    this.sessionToken = info.token;
    return info;
  }

  logout(): void {
    this.sessionToken = null;
  }

  listReferenda(): Promise<{ referenda: string[] }> {
    return this.request("GET", "/referenda");
  }

  status(referendumId: string): Promise<ReferendumStatus> {
    return this.request("GET", `/referenda/${encodeURIComponent(referendumId)}`);
  }

  advancePhase(referendumId: string, target: string): Promise<{ phase: string }> {
    return this.request("POST", `/referenda/${encodeURIComponent(referendumId)}/phase`, {
      target,
    });
  }

  issueToken(referendumId: string): Promise<TokenGrant> {
    return this.request("POST", `/referenda/${encodeURIComponent(referendumId)}/token`);
  }

  castBallot(
    referendumId: string,
    token: string,
    passphrase: string,
    vote: Vote,
  ): Promise<BallotResult> {
    return this.request("POST", `/referenda/${encodeURIComponent(referendumId)}/ballot`, {
      token,
      passphrase,
      vote,
    });
  }

  absenteeAck(referendumId: string): Promise<{ acknowledged: boolean }> {
    return this.request(
      "POST",
      `/referenda/${encodeURIComponent(referendumId)}/absentee-ack`,
    );
  }

  count(referendumId: string): Promise<CountInfo> {
    return this.request("GET", `/referenda/${encodeURIComponent(referendumId)}/count`);
  }

  promptText(referendumId: string): Promise<string> {
    return this.request(
      "GET",
      `/referenda/${encodeURIComponent(referendumId)}/prompt`,
      undefined,
      true,
    );
  }

  publishPrompt(referendumId: string): Promise<{ published: boolean }> {
    return this.request("POST", `/referenda/${encodeURIComponent(referendumId)}/publish`);
  }

  recordVerification(
    referendumId: string,
    attested: boolean,
    note?: string,
  ): Promise<{ recorded: boolean }> {
    return this.request(
      "POST",
      `/referenda/${encodeURIComponent(referendumId)}/verification`,
      { attested, note: note ?? null },
    );
  }

  participation(referendumId: string): Promise<Json> {
    return this.request(
      "GET",
      `/referenda/${encodeURIComponent(referendumId)}/participation`,
    );
  }

  bundle(referendumId: string): Promise<Json> {
    return this.request("GET", `/referenda/${encodeURIComponent(referendumId)}/bundle`);
  }

  fileDispute(
    referendumId: string,
    passphrase: string,
    claimedVote: Vote,
    proof?: { secret: string; vote: Vote },
  ): Promise<{ claim_id: string }> {
    return this.request("POST", `/referenda/${encodeURIComponent(referendumId)}/dispute`, {
      passphrase,
      claimed_vote: claimedVote,
      proof: proof ?? null,
    });
  }

  disputeQueue(referendumId: string): Promise<{ claims: ClaimRow[] }> {
    return this.request("GET", `/referenda/${encodeURIComponent(referendumId)}/disputes`);
  }

  adjudicate(referendumId: string, claimId: string): Promise<AdjudicationResult> {
    return this.request(
      "POST",
      `/referenda/${encodeURIComponent(referendumId)}/disputes/${encodeURIComponent(claimId)}/adjudicate`,
    );
  }

  applyCorrection(referendumId: string, claimId: string): Promise<{ applied: boolean }> {
    return this.request(
      "POST",
      `/referenda/${encodeURIComponent(referendumId)}/disputes/${encodeURIComponent(claimId)}/apply`,
    );
  }

  disputeReport(referendumId: string): Promise<Json> {
    return this.request(
      "GET",
      `/referenda/${encodeURIComponent(referendumId)}/dispute-report`,
    );
  }

  chainCheck(referendumId: string): Promise<ChainCheck> {
    return this.request(
      "GET",
      `/referenda/${encodeURIComponent(referendumId)}/chain-check`,
    );
  }
}
