"""Core domain model: votes, passphrases, phases, and the election aggregate.

The aggregate is a single-writer state machine. All mutation goes through
methods that hold the election lock, append audit events, and keep the
published artifacts free of voter identity and timestamps.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import threading
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .audit import AuditEventKind, AuditLog
from .errors import (
    DuplicateSubmission,
    EmptyPassphrase,
    IllegalTransition,
    IneligibleVoter,
    InvalidPassphrase,
    InvalidToken,
    LateVote,
    NotAbsenteeApproved,
    NotCorrectable,
    NotYetAvailable,
    PastCutoff,
    PhaseClosed,
    PhaseTooEarly,
    UnauthorizedActor,
    WrongPhase,
)

MAX_PASSPHRASE_LENGTH = 128


class Vote(str, Enum):
    YES = "YES"
    NO = "NO"
    ABSTAIN = "ABSTAIN"

    @classmethod
    def parse(cls, value: "Vote | str") -> "Vote":
        if isinstance(value, Vote):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"not a vote: {value!r}") from None


VOTE_ORDER = (Vote.YES, Vote.NO, Vote.ABSTAIN)


class Role(str, Enum):
    VOTER = "Voter"
    EA = "EA"
    CHAIR = "Chair"
    T1 = "T1"
    T2 = "T2"
    PANEL = "Panel"


def normalize_phrase(text: str) -> str:
    """Canonical comparison form: compose, casefold, collapse whitespace.

    Comparison and collation use this form; display always uses the text as
    entered.
    """
    folded = unicodedata.normalize("NFC", text).casefold()
    folded = unicodedata.normalize("NFC", folded)
    return " ".join(folded.split())


@dataclass(frozen=True)
class Passphrase:
    """Voter-chosen tag for one ballot. Kept verbatim for display."""

    raw: str
    normalized: str = field(init=False)

    def __post_init__(self):
        if any(unicodedata.category(ch) == "Cc" for ch in self.raw):
            raise InvalidPassphrase("passphrase may not contain control characters")
        if len(self.raw) > MAX_PASSPHRASE_LENGTH:
            raise InvalidPassphrase(
                f"passphrase longer than {MAX_PASSPHRASE_LENGTH} characters"
            )
        if not self.raw.strip():
            raise EmptyPassphrase("passphrase is empty")
        object.__setattr__(self, "normalized", normalize_phrase(self.raw))

    @classmethod
    def of(cls, value: "Passphrase | str") -> "Passphrase":
        return value if isinstance(value, Passphrase) else cls(str(value))


class ElectionPhase(str, Enum):
    SETUP = "Setup"
    ABSENTEE_OPEN = "AbsenteeOpen"
    VOTING_OPEN = "VotingOpen"
    VOTING_CLOSED = "VotingClosed"
    VERIFICATION_OPEN = "VerificationOpen"
    VERIFICATION_CLOSED = "VerificationClosed"
    REPORTED = "Reported"
    DISPUTE_WINDOW = "DisputeWindow"
    FINAL = "Final"


PHASE_ORDER: tuple[ElectionPhase, ...] = tuple(ElectionPhase)

# open/close of the two voter-facing windows may be done by the chair as well
CHAIR_TRANSITION_TARGETS = {
    ElectionPhase.VOTING_OPEN,
    ElectionPhase.VOTING_CLOSED,
    ElectionPhase.VERIFICATION_OPEN,
    ElectionPhase.VERIFICATION_CLOSED,
}


def phase_index(phase: ElectionPhase) -> int:
    return PHASE_ORDER.index(phase)


def ensure_aware(value: dt.datetime) -> dt.datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=dt.timezone.utc)
    return value


def utcnow() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)


@dataclass(frozen=True)
class Referendum:
    """Immutable configuration of one yes/no/abstain question."""

    referendum_id: str
    question: str
    date: dt.date
    eligible_voters: frozenset[str]
    absentee_approved: frozenset[str] = frozenset()
    meeting_start: dt.datetime = None  # type: ignore[assignment]
    absentee_cutoff: dt.datetime | None = None
    dispute_window_hours: int = 48
    commitment_mode: bool = False
    embed_prompt: bool = True

    def __post_init__(self):
        if not self.referendum_id.strip():
            raise ValueError("referendum_id must be non-empty")
        if not self.absentee_approved <= self.eligible_voters:
            raise ValueError("absentee approvals must be a subset of eligible voters")
        meeting = self.meeting_start
        if meeting is None:
            meeting = dt.datetime.combine(self.date, dt.time(9, 0), dt.timezone.utc)
        meeting = ensure_aware(meeting)
        object.__setattr__(self, "meeting_start", meeting)
        cutoff = self.absentee_cutoff
        if cutoff is None:
            cutoff = meeting - dt.timedelta(minutes=60)
        cutoff = ensure_aware(cutoff)
        if cutoff >= meeting:
            raise ValueError("absentee cutoff must precede the meeting start")
        object.__setattr__(self, "absentee_cutoff", cutoff)
        if self.dispute_window_hours <= 0:
            raise ValueError("dispute window must be positive")


@dataclass
class TokenState:
    """Registrar-side record of one voting token. Carries no identity."""

    value: str
    referendum_id: str
    absentee: bool = False
    consumed: bool = False


@dataclass(frozen=True)
class BallotEntry:
    """One accepted (passphrase, vote) pair.

    seq and submitted_at exist for internal ordering only and never appear
    in a published artifact.
    """

    passphrase: Passphrase
    vote: Vote
    seq: int
    submitted_at: dt.datetime
    absentee: bool = False


class VoteTable:
    """Submission-ordered ballot store; freezes when voting closes."""

    def __init__(self, referendum_id: str, entries: Iterable[BallotEntry] = ()):
        self.referendum_id = referendum_id
        self._entries: list[BallotEntry] = list(entries)
        self._frozen = False

    @property
    def entries(self) -> tuple[BallotEntry, ...]:
        return tuple(self._entries)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def __len__(self) -> int:
        return len(self._entries)

    def append(self, entry: BallotEntry) -> None:
        if self._frozen:
            raise WrongPhase("vote table is frozen")
        self._entries.append(entry)

    def freeze(self) -> None:
        self._frozen = True

    def _replace_entry(self, position: int, entry: BallotEntry) -> None:
        # sanctioned only by the dispute-correction path; audited by the caller
        self._entries[position] = entry


@dataclass(frozen=True)
class ParticipationReport:
    voted: tuple[str, ...]
    did_not_vote: tuple[str, ...]
    absentee: tuple[str, ...]
    ballot_count: int
    discrepancy: bool


class Election:
    """One referendum's full lifecycle under a single writer lock."""

    def __init__(self, referendum: Referendum, audit_log: AuditLog | None = None):
        self.referendum = referendum
        self.phase = ElectionPhase.SETUP
        self.vote_table = VoteTable(referendum.referendum_id)
        self.audit_log = audit_log if audit_log is not None else AuditLog()
        self.attestations: dict[str, tuple[bool, str | None]] = {}
        self.absentee_acks: dict[str, dt.datetime] = {}
        self.prompt_revisions: list[str] = []
        self.bundle_revisions = 0
        self.closing_count: int | None = None
        self.reported_at: dt.datetime | None = None
        self.lock = threading.RLock()

    # --- phase machine -----------------------------------------------------

    def legal_successors(self) -> set[ElectionPhase]:
        if self.phase is ElectionPhase.FINAL:
            return set()
        if self.phase is ElectionPhase.SETUP:
            successors = {ElectionPhase.ABSENTEE_OPEN}
            if not self.referendum.absentee_approved:
                # nothing to do in an absentee window nobody may use
                successors.add(ElectionPhase.VOTING_OPEN)
            return successors
        return {PHASE_ORDER[phase_index(self.phase) + 1]}

    def advance_phase(
        self,
        target: ElectionPhase,
        actor_role: Role,
        actor_id: str | None = None,
        now: dt.datetime | None = None,
    ) -> ElectionPhase:
        now = ensure_aware(now) if now is not None else utcnow()
        with self.lock:
            if actor_role is Role.EA:
                pass
            elif actor_role is Role.CHAIR and target in CHAIR_TRANSITION_TARGETS:
                pass
            else:
                raise UnauthorizedActor(
                    f"{actor_role.value} may not move the referendum to {target.value}"
                )
            if target not in self.legal_successors():
                raise IllegalTransition(
                    f"{self.phase.value} -> {target.value} is not a legal transition"
                )
            if target is ElectionPhase.VERIFICATION_OPEN and not self.prompt_revisions:
                raise WrongPhase("prompt must be published before verification opens")

            previous = self.phase
            self.phase = target
            if target is ElectionPhase.VOTING_CLOSED:
                self.vote_table.freeze()
                self.closing_count = len(self.vote_table)
            if target is ElectionPhase.REPORTED:
                self.reported_at = now
            self.audit_log.append(
                AuditEventKind.PHASE_CHANGE,
                {
                    "from": previous.value,
                    "to": target.value,
                    "actor_role": actor_role.value,
                    "actor": actor_id,
                },
            )
            return target

    def _phase_at_least(self, floor: ElectionPhase) -> bool:
        return phase_index(self.phase) >= phase_index(floor)

    # --- ballots -------------------------------------------------------------

    def cast_ballot(
        self,
        token: TokenState,
        passphrase: Passphrase | str,
        vote: Vote | str,
        now: dt.datetime | None = None,
    ) -> BallotEntry:
        now = ensure_aware(now) if now is not None else utcnow()
        with self.lock:
            if token.referendum_id != self.referendum.referendum_id:
                raise InvalidToken("token was issued for a different referendum")
            if self.phase is ElectionPhase.VOTING_OPEN:
                pass
            elif (
                self.phase is ElectionPhase.ABSENTEE_OPEN
                and token.absentee
                and now <= self.referendum.absentee_cutoff
            ):
                pass
            else:
                raise LateVote("no voting window is open for this token")
            if token.consumed:
                raise DuplicateSubmission("token has already been used")

            entry = BallotEntry(
                passphrase=Passphrase.of(passphrase),
                vote=Vote.parse(vote),
                seq=len(self.vote_table) + 1,
                submitted_at=now,
                absentee=self.phase is ElectionPhase.ABSENTEE_OPEN,
            )
            self.vote_table.append(entry)
            token.consumed = True
            # count only; the ballot itself never enters the audit log
            self.audit_log.append(
                AuditEventKind.BALLOT_ACCEPTED, {"count": len(self.vote_table)}
            )
            return entry

    def live_count(self) -> int:
        if not self._phase_at_least(ElectionPhase.VOTING_OPEN):
            raise PhaseTooEarly("running count is not available before voting opens")
        return len(self.vote_table)

    def tally(self) -> dict[Vote, int]:
        if not self._phase_at_least(ElectionPhase.VOTING_CLOSED):
            raise NotYetAvailable("per-option counts are hidden until voting closes")
        counts = Counter(entry.vote for entry in self.vote_table.entries)
        return {vote: counts.get(vote, 0) for vote in VOTE_ORDER}

    # --- absentee and verification --------------------------------------------

    def record_absentee_ack(self, voter_id: str, now: dt.datetime | None = None) -> None:
        now = ensure_aware(now) if now is not None else utcnow()
        with self.lock:
            if voter_id not in self.referendum.absentee_approved:
                raise NotAbsenteeApproved(f"{voter_id} is not approved for absentee voting")
            if now > self.referendum.absentee_cutoff:
                raise PastCutoff("absentee acknowledgment received after the cutoff")
            if voter_id in self.absentee_acks:
                return
            self.absentee_acks[voter_id] = now
            self.audit_log.append(AuditEventKind.ABSENTEE_ACK, {"voter_id": voter_id})

    def record_verification(
        self, voter_id: str, attested: bool = True, note: str | None = None
    ) -> None:
        with self.lock:
            if self.phase is not ElectionPhase.VERIFICATION_OPEN:
                raise PhaseClosed("verification window is not open")
            if voter_id not in self.referendum.eligible_voters:
                raise IneligibleVoter(f"{voter_id} is not on the roster")
            if voter_id in self.attestations and self.attestations[voter_id] == (attested, note):
                return
            first_record = voter_id not in self.attestations
            self.attestations[voter_id] = (attested, note)
            if first_record:
                self.audit_log.append(
                    AuditEventKind.VERIFICATION_RECORDED,
                    {"voter_id": voter_id, "attested": attested},
                )

    def participation_report(self) -> ParticipationReport:
        if not self._phase_at_least(ElectionPhase.VERIFICATION_CLOSED):
            raise PhaseTooEarly("participation is reported after verification closes")
        voted = set(self.attestations) | set(self.absentee_acks)
        return ParticipationReport(
            voted=tuple(sorted(voted)),
            did_not_vote=tuple(sorted(self.referendum.eligible_voters - voted)),
            absentee=tuple(sorted(self.absentee_acks)),
            ballot_count=len(self.vote_table),
            discrepancy=len(self.vote_table) != len(voted),
        )

    # --- prompt publication -----------------------------------------------------

    @property
    def current_prompt_text(self) -> str | None:
        return self.prompt_revisions[-1] if self.prompt_revisions else None

    def publish_prompt(self, text: str) -> bool:
        """Record the released prompt. Returns False when already published."""
        with self.lock:
            if self.prompt_revisions:
                if text == self.prompt_revisions[0]:
                    return False
                raise WrongPhase("prompt has already been published")
            if self.phase is not ElectionPhase.VOTING_CLOSED:
                raise WrongPhase("prompt is released only after voting closes")
            self.prompt_revisions.append(text)
            self.audit_log.append(
                AuditEventKind.PROMPT_PUBLISHED,
                {"revision": 0, "prompt_sha256": _sha256_text(text)},
            )
            return True

    def apply_prompt_revision(self, text: str, correction: Mapping[str, object]) -> None:
        """Store a corrected prompt; the original stays in earlier revisions."""
        with self.lock:
            if self.phase is not ElectionPhase.DISPUTE_WINDOW:
                raise WrongPhase("corrections are applied during the dispute window")
            self.prompt_revisions.append(text)
            payload = dict(correction)
            payload["revision"] = len(self.prompt_revisions) - 1
            payload["prompt_sha256"] = _sha256_text(text)
            self.audit_log.append(AuditEventKind.CORRECTION_APPLIED, payload)

    def correct_entry(self, normalized_phrase: str, old_vote: Vote, new_vote: Vote) -> BallotEntry:
        """Flip the vote of the single entry matching (phrase, old_vote)."""
        with self.lock:
            matches = [
                (i, entry)
                for i, entry in enumerate(self.vote_table.entries)
                if entry.passphrase.normalized == normalized_phrase and entry.vote == old_vote
            ]
            if len(matches) != 1:
                raise NotCorrectable(
                    f"{len(matches)} entries match the pair to correct; exactly one required"
                )
            position, entry = matches[0]
            corrected = BallotEntry(
                passphrase=entry.passphrase,
                vote=new_vote,
                seq=entry.seq,
                submitted_at=entry.submitted_at,
                absentee=entry.absentee,
            )
            self.vote_table._replace_entry(position, corrected)
            return corrected

    # --- persistence ----------------------------------------------------------

    def to_records(self) -> dict[str, dict]:
        ref = self.referendum
        return {
            "config": {
                "referendum_id": ref.referendum_id,
                "question": ref.question,
                "date": ref.date.isoformat(),
                "eligible_voters": sorted(ref.eligible_voters),
                "absentee_approved": sorted(ref.absentee_approved),
                "meeting_start": ref.meeting_start.isoformat(),
                "absentee_cutoff": ref.absentee_cutoff.isoformat(),
                "dispute_window_hours": ref.dispute_window_hours,
                "commitment_mode": ref.commitment_mode,
                "embed_prompt": ref.embed_prompt,
            },
            "state": {
                "phase": self.phase.value,
                "closing_count": self.closing_count,
                "reported_at": self.reported_at.isoformat() if self.reported_at else None,
                "bundle_revisions": self.bundle_revisions,
                "log_sealed": self.audit_log.sealed,
            },
            "table": {
                "frozen": self.vote_table.frozen,
                "entries": [
                    {
                        "passphrase": e.passphrase.raw,
                        "vote": e.vote.value,
                        "seq": e.seq,
                        "submitted_at": e.submitted_at.isoformat(),
                        "absentee": e.absentee,
                    }
                    for e in self.vote_table.entries
                ],
            },
            "participation": {
                "attestations": {
                    voter: [attested, note]
                    for voter, (attested, note) in self.attestations.items()
                },
                "absentee_acks": {
                    voter: when.isoformat() for voter, when in self.absentee_acks.items()
                },
            },
            "prompt": {"revisions": list(self.prompt_revisions)},
            "audit": {"events": [e.to_record() for e in self.audit_log.events]},
        }

    @classmethod
    def from_records(cls, records: Mapping[str, dict]) -> "Election":
        config = records["config"]
        referendum = Referendum(
            referendum_id=config["referendum_id"],
            question=config["question"],
            date=dt.date.fromisoformat(config["date"]),
            eligible_voters=frozenset(config["eligible_voters"]),
            absentee_approved=frozenset(config["absentee_approved"]),
            meeting_start=dt.datetime.fromisoformat(config["meeting_start"]),
            absentee_cutoff=dt.datetime.fromisoformat(config["absentee_cutoff"]),
            dispute_window_hours=config["dispute_window_hours"],
            commitment_mode=config["commitment_mode"],
            embed_prompt=config["embed_prompt"],
        )
        state = records["state"]
        log = AuditLog.from_records(
            records["audit"]["events"], sealed=state["log_sealed"]
        )
        election = cls(referendum, audit_log=log)
        election.phase = ElectionPhase(state["phase"])
        election.closing_count = state["closing_count"]
        election.reported_at = (
            dt.datetime.fromisoformat(state["reported_at"]) if state["reported_at"] else None
        )
        election.bundle_revisions = state["bundle_revisions"]

        table = records["table"]
        for row in table["entries"]:
            election.vote_table.append(
                BallotEntry(
                    passphrase=Passphrase(row["passphrase"]),
                    vote=Vote(row["vote"]),
                    seq=row["seq"],
                    submitted_at=dt.datetime.fromisoformat(row["submitted_at"]),
                    absentee=row["absentee"],
                )
            )
        if table["frozen"]:
            election.vote_table.freeze()

        participation = records["participation"]
        election.attestations = {
            voter: (attested, note)
            for voter, (attested, note) in participation["attestations"].items()
        }
        election.absentee_acks = {
            voter: dt.datetime.fromisoformat(when)
            for voter, when in participation["absentee_acks"].items()
        }
        election.prompt_revisions = list(records["prompt"]["revisions"])
        return election


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
