import type { PvvClient, SessionInfo } from "./api.js";

export interface AppContext {
  client: PvvClient;
  session: SessionInfo | null;
  referendumId: string | null;
}

export const WARNING_TEXT: Record<string, string> = {
  NotTwoWords: "not two words; harder to find in the published list",
  LowEntropy: "very short words collide easily",
  PossibleInitials: "looks like initials, which could identify you",
  ReusedPhrase: "same phrase was already submitted by someone",
};
