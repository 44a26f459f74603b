"""Error vocabulary shared across the voting modules.

Every rejection the protocol can produce is a distinct exception type so
callers (and the HTTP layer) can map outcomes without parsing messages.
"""

from __future__ import annotations


class PvvError(Exception):
    """Base class for all protocol errors."""


# --- phase machine ---------------------------------------------------------

class IllegalTransition(PvvError):
    """Requested phase is not a legal successor of the current phase."""


class UnauthorizedActor(PvvError):
    """Actor's role does not permit the requested operation."""


class WrongPhase(PvvError):
    """Operation attempted in a phase where it is not defined."""


class PhaseTooEarly(PvvError):
    """Read attempted before the phase that makes it available."""


class NotYetAvailable(PvvError):
    """Per-option tallies are hidden until voting has closed."""


# --- ballot intake ---------------------------------------------------------

class LateVote(PvvError):
    """Submission outside an open voting window for the presented token."""


class DuplicateSubmission(PvvError):
    """The presented token has already been consumed."""


class InvalidToken(PvvError):
    """Token is unknown or bound to a different referendum."""


class NotAbsenteeApproved(PvvError):
    """Voter is not on the approved absentee list."""


class PastCutoff(PvvError):
    """Absentee action attempted after the cutoff."""


class PhaseClosed(PvvError):
    """Verification attempted outside the verification window."""


class IneligibleVoter(PvvError):
    """Named voter is not on the eligibility roster."""


# --- registrar -------------------------------------------------------------

class AlreadyIssued(PvvError):
    """Voter already holds a token for this referendum."""


class Ineligible(PvvError):
    """Principal may not receive a token (not on the roster, or a trustee)."""


# --- passphrases and commitments -------------------------------------------

class InvalidPassphrase(PvvError):
    """Passphrase violates a structural constraint (length, control chars)."""


class EmptyPassphrase(InvalidPassphrase):
    """Passphrase is empty after trimming."""


class InvalidModel(PvvError):
    """Collision-model parameters are out of range."""


class WeakSecret(PvvError):
    """Commitment secret is shorter than the minimum."""


class UnknownScheme(PvvError):
    """Commitment names a scheme this build does not implement."""


# --- prompt ----------------------------------------------------------------

class MalformedPrompt(PvvError):
    """Published prompt text violates the canonical grammar."""


# --- audit -----------------------------------------------------------------

class LogSealed(PvvError):
    """Append attempted after the final bundle sealed the log."""


class PrivacyViolation(PvvError):
    """A published artifact would leak an identity or a timestamp."""


class ReferendumMismatch(PvvError):
    """Artifacts from different referenda were combined."""


# --- disputes ---------------------------------------------------------------

class WindowClosed(PvvError):
    """Dispute filed outside the dispute window."""


class IneligibleClaimant(PvvError):
    """Dispute filed by a principal not on the roster."""


class NotCorrectable(PvvError):
    """Correction requested for a claim that is not ValidCorrectable."""


# --- service plumbing -------------------------------------------------------

class AccessDenied(PvvError):
    """Store namespace read attempted by a role without access."""


class UnknownReferendum(PvvError):
    """No referendum with the given id exists."""


class AuthenticationFailed(PvvError):
    """Principal could not be authenticated."""
