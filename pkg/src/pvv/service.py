"""Application service tying the model to storage, sessions, and notification.

Anonymity is structural: ballot submission takes a token and no session, the
registrar namespace stores tokens keyed by value with no identity, and the
issued-flag records carry identity with no token value. Nothing the service
persists associates a voter with a ballot.
"""

from __future__ import annotations

import datetime as dt
import secrets
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from . import disputes
from .audit import AuditBundle, ChainVerification, assemble_bundle
from .errors import (
    AlreadyIssued,
    AuthenticationFailed,
    Ineligible,
    InvalidToken,
    NotYetAvailable,
    PhaseTooEarly,
    UnauthorizedActor,
    UnknownReferendum,
    WrongPhase,
)
from .model import (
    Election,
    ElectionPhase,
    Passphrase,
    Referendum,
    Role,
    TokenState,
    Vote,
    ensure_aware,
    utcnow,
)
from .notify import LogNotifier, Message, Notifier
from .phrases import ValidationReport, validate
from .prompt import build_prompt, parse_prompt, render_prompt
from .store import KeyValueStore, Namespace

SESSION_TTL = dt.timedelta(hours=8)


@dataclass(frozen=True)
class RoleAssignment:
    """Who holds which trusted role for this service instance."""

    ea: frozenset[str]
    chair: str
    t1: str
    t2: str
    panel: frozenset[str] = frozenset()

    def to_record(self) -> dict:
        return {
            "ea": sorted(self.ea),
            "chair": self.chair,
            "t1": self.t1,
            "t2": self.t2,
            "panel": sorted(self.panel),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> "RoleAssignment":
        return cls(
            ea=frozenset(record["ea"]),
            chair=record["chair"],
            t1=record["t1"],
            t2=record["t2"],
            panel=frozenset(record.get("panel", ())),
        )


@dataclass
class Session:
    token: str
    principal: str
    expires_at: dt.datetime


class Authenticator(ABC):
    """Boundary where a deployment plugs in its single sign-on."""

    @abstractmethod
    def authenticate(self, service: "VotingService", principal: str,
                     credential: str | None) -> bool:
        ...


class StaticRosterAuthenticator(Authenticator):
    """Accepts any principal the service already knows about. Test stand-in."""

    def __init__(self, extra_principals: Iterable[str] = ()):
        self.extra_principals = frozenset(extra_principals)

    def authenticate(self, service: "VotingService", principal: str,
                     credential: str | None) -> bool:
        return principal in service.known_principals() or principal in self.extra_principals


class VotingService:
    def __init__(
        self,
        store: KeyValueStore | None = None,
        roles: RoleAssignment | None = None,
        authenticator: Authenticator | None = None,
        notifier: Notifier | None = None,
        clock: Callable[[], dt.datetime] | None = None,
    ):
        self.store = store if store is not None else KeyValueStore()
        self.notifier = notifier if notifier is not None else LogNotifier()
        self.authenticator = authenticator if authenticator is not None else StaticRosterAuthenticator()
        self.clock = clock if clock is not None else utcnow
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._elections: dict[str, Election] = {}

        stored_roles = self.store.get(Namespace.ELECTION, "service/roles")
        if roles is not None:
            self.roles = roles
            self.store.put(Namespace.ELECTION, "service/roles", roles.to_record())
        elif stored_roles is not None:
            self.roles = RoleAssignment.from_record(stored_roles)
        else:
            self.roles = None
        self._load_elections()

    # --- sessions and roles ---------------------------------------------------

    def known_principals(self) -> frozenset[str]:
        known: set[str] = set()
        if self.roles is not None:
            known.update(self.roles.ea)
            known.update({self.roles.chair, self.roles.t1, self.roles.t2})
            known.update(self.roles.panel)
        for election in self._elections.values():
            known.update(election.referendum.eligible_voters)
        return frozenset(known)

    def create_session(self, principal: str, credential: str | None = None) -> Session:
        if not self.authenticator.authenticate(self, principal, credential):
            raise AuthenticationFailed(f"unknown principal: {principal!r}")
        session = Session(
            token=secrets.token_urlsafe(24),
            principal=principal,
            expires_at=self.clock() + SESSION_TTL,
        )
        with self._lock:
            self._sessions[session.token] = session
        return session

    def session(self, token: str) -> Session:
        with self._lock:
            session = self._sessions.get(token)
        if session is None or self.clock() >= session.expires_at:
            raise AuthenticationFailed("session is missing or expired")
        return session

    def roles_for(self, principal: str) -> frozenset[Role]:
        roles: set[Role] = set()
        if self.roles is not None:
            if principal in self.roles.ea:
                roles.add(Role.EA)
            if principal == self.roles.chair:
                roles.add(Role.CHAIR)
            if principal == self.roles.t1:
                roles.add(Role.T1)
            if principal == self.roles.t2:
                roles.add(Role.T2)
            if principal in self.roles.panel:
                roles.add(Role.PANEL)
        if any(
            principal in e.referendum.eligible_voters for e in self._elections.values()
        ):
            roles.add(Role.VOTER)
        return frozenset(roles)

    def _require(self, session: Session, *allowed: Role) -> frozenset[Role]:
        held = self.roles_for(session.principal)
        if not held.intersection(allowed):
            wanted = ", ".join(role.value for role in allowed)
            raise UnauthorizedActor(f"{session.principal} holds none of: {wanted}")
        return held

    # --- referendum lifecycle ----------------------------------------------------

    def create_referendum(self, session: Session, config: Mapping[str, Any]) -> Referendum:
        self._require(session, Role.EA)
        referendum = _referendum_from_config(config)
        if self.roles is not None:
            trustees = {self.roles.t1, self.roles.t2}
            overlap = referendum.eligible_voters & trustees
            if overlap:
                raise ValueError(f"trusted parties may not be on the roster: {sorted(overlap)}")
        with self._lock:
            if referendum.referendum_id in self._elections:
                raise ValueError(f"referendum {referendum.referendum_id!r} already exists")
            election = Election(referendum)
            self._elections[referendum.referendum_id] = election
            self._persist(election)
            index = self.store.get(Namespace.ELECTION, "referenda", [])
            index.append(referendum.referendum_id)
            self.store.put(Namespace.ELECTION, "referenda", sorted(set(index)))
        return referendum

    def referendum_ids(self) -> list[str]:
        return sorted(self._elections)

    def election(self, referendum_id: str) -> Election:
        election = self._elections.get(referendum_id)
        if election is None:
            raise UnknownReferendum(f"no referendum {referendum_id!r}")
        return election

    def advance_phase(self, session: Session, referendum_id: str,
                      target: ElectionPhase | str) -> ElectionPhase:
        held = self._require(session, Role.EA, Role.CHAIR)
        actor_role = Role.EA if Role.EA in held else Role.CHAIR
        target = target if isinstance(target, ElectionPhase) else ElectionPhase(target)
        election = self.election(referendum_id)
        now = self.clock()
        with election.lock:
            election.advance_phase(target, actor_role, actor_id=session.principal, now=now)
            if target is ElectionPhase.REPORTED:
                self._publish_bundle(election)
            elif target is ElectionPhase.FINAL:
                summary = self._dispute_summary(referendum_id)
                self._publish_bundle(election, summary)
            self._persist(election)
        return election.phase

    # --- registrar ---------------------------------------------------------------

    def issue_token(self, session: Session, referendum_id: str) -> TokenState:
        election = self.election(referendum_id)
        voter = session.principal
        if voter not in election.referendum.eligible_voters:
            raise Ineligible(f"{voter} is not eligible to vote in {referendum_id}")
        flag_key = f"issued/{referendum_id}/{voter}"
        with self._lock:
            if self.store.get(Namespace.REGISTRAR, flag_key) is not None:
                raise AlreadyIssued(f"{voter} already holds a token for {referendum_id}")
            token = TokenState(
                value=secrets.token_hex(16),
                referendum_id=referendum_id,
                absentee=(
                    election.phase is ElectionPhase.ABSENTEE_OPEN
                    and voter in election.referendum.absentee_approved
                ),
            )
            # two records, never joined: token value with no identity,
            # identity with no token value
            self.store.put(
                Namespace.REGISTRAR,
                f"token/{token.value}",
                {
                    "referendum_id": token.referendum_id,
                    "absentee": token.absentee,
                    "consumed": token.consumed,
                },
            )
            self.store.put(Namespace.REGISTRAR, flag_key, {"issued": True})
        return token

    # --- ballots -------------------------------------------------------------------

    def cast_ballot(self, referendum_id: str, token_value: str,
                    passphrase: str, vote: Vote | str) -> ValidationReport:
        """Anonymous: no session. The token is the entire credential."""
        election = self.election(referendum_id)
        record_key = f"token/{token_value}"
        record = self.store.get(Namespace.REGISTRAR, record_key)
        if record is None or record["referendum_id"] != referendum_id:
            raise InvalidToken("token is unknown or bound to a different referendum")
        report = validate(passphrase)
        token = TokenState(
            value=token_value,
            referendum_id=record["referendum_id"],
            absentee=record["absentee"],
            consumed=record["consumed"],
        )
        with election.lock:
            election.cast_ballot(token, report.passphrase, vote, now=self.clock())
            record["consumed"] = True
            self.store.put(Namespace.REGISTRAR, record_key, record)
            self._persist(election)
        return report

    def live_count(self, referendum_id: str) -> int:
        return self.election(referendum_id).live_count()

    def tally(self, referendum_id: str) -> dict[Vote, int]:
        return self.election(referendum_id).tally()

    # --- absentee and verification ----------------------------------------------------

    def record_absentee_ack(self, session: Session, referendum_id: str) -> None:
        election = self.election(referendum_id)
        with election.lock:
            election.record_absentee_ack(session.principal, now=self.clock())
            self._persist(election)

    def record_verification(self, session: Session, referendum_id: str,
                            attested: bool = True, note: str | None = None) -> None:
        election = self.election(referendum_id)
        with election.lock:
            election.record_verification(session.principal, attested=attested, note=note)
            self._persist(election)

    def participation(self, session: Session, referendum_id: str) -> dict:
        self._require(session, Role.EA, Role.CHAIR, Role.PANEL)
        report = self.election(referendum_id).participation_report()
        return {
            "voted": list(report.voted),
            "did_not_vote": list(report.did_not_vote),
            "absentee": list(report.absentee),
            "ballot_count": report.ballot_count,
            "discrepancy": report.discrepancy,
        }

    # --- prompt ---------------------------------------------------------------------------

    def publish_prompt(self, session: Session, referendum_id: str) -> str:
        self._require(session, Role.EA)
        election = self.election(referendum_id)
        with election.lock:
            if election.phase is not ElectionPhase.VOTING_CLOSED:
                raise WrongPhase("prompt is published after voting closes")
            text = render_prompt(build_prompt(election.vote_table))
            newly_published = election.publish_prompt(text)
            self._persist(election)
        if newly_published:
            self._broadcast_prompt(election, text)
        return text

    def get_prompt(self, referendum_id: str) -> str:
        text = self.election(referendum_id).current_prompt_text
        if text is None:
            raise PhaseTooEarly("prompt has not been published")
        return text

    # --- bundle and audit --------------------------------------------------------------------

    def get_bundle(self, referendum_id: str) -> dict:
        self.election(referendum_id)  # existence check
        revisions = self.store.keys(Namespace.ELECTION, f"referendum/{referendum_id}/bundle/")
        if not revisions:
            raise NotYetAvailable("no bundle has been published")
        latest = max(revisions, key=lambda key: int(key.rsplit("/", 1)[-1]))
        return self.store.get(Namespace.ELECTION, latest)

    def get_bundles(self, referendum_id: str) -> list[dict]:
        keys = self.store.keys(Namespace.ELECTION, f"referendum/{referendum_id}/bundle/")
        ordered = sorted(keys, key=lambda key: int(key.rsplit("/", 1)[-1]))
        return [self.store.get(Namespace.ELECTION, key) for key in ordered]

    def audit_log_export(self, referendum_id: str) -> str:
        return self.election(referendum_id).audit_log.to_jsonl()

    def verify_chain(self, referendum_id: str) -> ChainVerification:
        return self.election(referendum_id).audit_log.verify()

    def _publish_bundle(self, election: Election,
                        dispute_summary: Mapping[str, Any] | None = None) -> AuditBundle:
        bundle = assemble_bundle(election, dispute_summary)
        referendum_id = election.referendum.referendum_id
        self.store.put(
            Namespace.ELECTION,
            f"referendum/{referendum_id}/bundle/{bundle.revision}",
            bundle.to_document(),
        )
        self._broadcast_report(election, bundle)
        return bundle

    # --- disputes --------------------------------------------------------------------------------

    def file_dispute(self, session: Session, referendum_id: str, passphrase: str,
                     claimed_vote: Vote | str,
                     proof: disputes.ClaimProof | None = None) -> disputes.DisputeClaim:
        election = self.election(referendum_id)
        with election.lock:
            existing = self.store.keys(Namespace.CLAIMS, f"claim/{referendum_id}/")
            claim = disputes.file_claim(
                election,
                voter_id=session.principal,
                passphrase=passphrase,
                claimed_vote=claimed_vote,
                now=self.clock(),
                proof=proof,
                claim_id=f"claim-{len(existing) + 1}",
            )
            self.store.put(
                Namespace.CLAIMS,
                f"claim/{referendum_id}/{claim.claim_id}",
                _claim_record(claim),
            )
            self._persist(election)
        return claim

    def dispute_queue(self, session: Session, referendum_id: str) -> list[dict]:
        """Anonymized view for the dashboard: what was claimed, how it stands."""
        self._require(session, Role.EA, Role.CHAIR, Role.PANEL)
        queue = []
        for _, record in self.store.items(Namespace.CLAIMS, f"claim/{referendum_id}/"):
            queue.append(
                {
                    "claim_id": record["claim_id"],
                    "passphrase": record["passphrase"],
                    "claimed_vote": record["claimed_vote"],
                    "classification": record.get("classification"),
                    "applied": record.get("applied", False),
                }
            )
        return sorted(queue, key=lambda row: row["claim_id"])

    def adjudicate_claim(self, session: Session, referendum_id: str,
                         claim_id: str) -> disputes.AdjudicationOutcome:
        self._require(session, Role.PANEL)
        election = self.election(referendum_id)
        record = self._claim(referendum_id, claim_id)
        claim = _claim_from_record(record)
        prompt = parse_prompt(self.get_prompt(referendum_id))
        outcome = disputes.adjudicate(claim, prompt)
        record["classification"] = outcome.classification.value
        record["rationale"] = outcome.rationale
        record["proven"] = outcome.proven
        if outcome.correction is not None:
            record["correction"] = {
                "passphrase": outcome.correction.passphrase,
                "display": outcome.correction.display,
                "old_vote": outcome.correction.old_vote.value,
                "new_vote": outcome.correction.new_vote.value,
            }
        self.store.put(Namespace.CLAIMS, f"claim/{referendum_id}/{claim_id}", record)
        return outcome

    def apply_correction(self, session: Session, referendum_id: str, claim_id: str) -> str:
        self._require(session, Role.EA)
        election = self.election(referendum_id)
        record = self._claim(referendum_id, claim_id)
        outcome = _outcome_from_record(record)
        with election.lock:
            corrected, _ = disputes.apply_correction(election, outcome)
            record["applied"] = True
            self.store.put(Namespace.CLAIMS, f"claim/{referendum_id}/{claim_id}", record)
            self._persist(election)
        return render_prompt(corrected)

    def dispute_report(self, referendum_id: str) -> dict:
        election = self.election(referendum_id)
        now = self.clock()
        window_end = disputes.dispute_window_end(election)
        window_closed = election.phase is ElectionPhase.FINAL or (
            election.phase is ElectionPhase.DISPUTE_WINDOW
            and window_end is not None
            and now > window_end
        )
        if not window_closed:
            raise PhaseTooEarly("dispute report is published after the window closes")
        return self._dispute_summary(referendum_id)

    def _dispute_summary(self, referendum_id: str) -> dict:
        claims: list[disputes.DisputeClaim] = []
        outcomes: dict[str, disputes.AdjudicationOutcome] = {}
        for _, record in self.store.items(Namespace.CLAIMS, f"claim/{referendum_id}/"):
            claim = _claim_from_record(record)
            claims.append(claim)
            if record.get("classification"):
                outcomes[claim.claim_id] = _outcome_from_record(record)
        report = disputes.dispute_report(referendum_id, claims, outcomes)
        return {"claim_count": report.claim_count, "claims": [dict(r) for r in report.claims]}

    def _claim(self, referendum_id: str, claim_id: str) -> dict:
        record = self.store.get(Namespace.CLAIMS, f"claim/{referendum_id}/{claim_id}")
        if record is None:
            raise UnknownReferendum(f"no claim {claim_id!r} for {referendum_id!r}")
        return record

    # --- notifications -----------------------------------------------------------------------------

    def _recipients(self, election: Election) -> list[str]:
        recipients = sorted(election.referendum.eligible_voters)
        if self.roles is not None:
            recipients.append(self.roles.t2)  # observer copy of every broadcast
        return recipients

    def _broadcast_prompt(self, election: Election, text: str) -> None:
        referendum_id = election.referendum.referendum_id
        body = (
            f"Voting for referendum {referendum_id} has closed.\n"
            f"Check that your (passphrase, vote) pair is listed correctly:\n"
            f"/referenda/{referendum_id}/prompt\n"
        )
        if election.referendum.embed_prompt:
            body += "\n" + text
        subject = f"Verification request: {referendum_id}"
        for recipient in self._recipients(election):
            self.notifier.send(Message(recipient=recipient, subject=subject, body=body))

    def _broadcast_report(self, election: Election, bundle: AuditBundle) -> None:
        referendum_id = election.referendum.referendum_id
        body = (
            f"The report for referendum {referendum_id} has been published "
            f"(revision {bundle.revision}).\n"
            f"/referenda/{referendum_id}/bundle\n"
            f"Bundle hash: {bundle.content_hash()}\n"
        )
        subject = f"Referendum report: {referendum_id}"
        for recipient in self._recipients(election):
            self.notifier.send(Message(recipient=recipient, subject=subject, body=body))

    # --- persistence ---------------------------------------------------------------------------------

    def _persist(self, election: Election) -> None:
        referendum_id = election.referendum.referendum_id
        for section, record in election.to_records().items():
            self.store.put(
                Namespace.ELECTION, f"referendum/{referendum_id}/{section}", record
            )

    def _load_elections(self) -> None:
        for key in self.store.keys(Namespace.ELECTION, "referendum/"):
            parts = key.split("/")
            if len(parts) == 3 and parts[2] == "config":
                referendum_id = parts[1]
                records = {
                    section: self.store.get(
                        Namespace.ELECTION, f"referendum/{referendum_id}/{section}"
                    )
                    for section in ("config", "state", "table", "participation", "prompt", "audit")
                }
                self._elections[referendum_id] = Election.from_records(records)


# --- config and record helpers -------------------------------------------------------


def _referendum_from_config(config: Mapping[str, Any]) -> Referendum:
    def parse_dt(value: Any) -> dt.datetime | None:
        if value in (None, ""):
            return None
        return ensure_aware(dt.datetime.fromisoformat(value)) if isinstance(value, str) else value

    meeting_start = parse_dt(config.get("meeting_start"))
    cutoff = parse_dt(config.get("absentee_cutoff"))
    return Referendum(
        referendum_id=config["referendum_id"],
        question=config.get("question", ""),
        date=dt.date.fromisoformat(config["date"])
        if isinstance(config.get("date"), str)
        else config["date"],
        eligible_voters=frozenset(config["eligible_voters"]),
        absentee_approved=frozenset(config.get("absentee_approved", ())),
        meeting_start=meeting_start,
        absentee_cutoff=cutoff,
        dispute_window_hours=config.get("dispute_window_hours", 48),
        commitment_mode=config.get("commitment_mode", False),
        embed_prompt=config.get("embed_prompt", True),
    )


def _claim_record(claim: disputes.DisputeClaim) -> dict:
    return {
        "claim_id": claim.claim_id,
        "voter_id": claim.voter_id,
        "passphrase": claim.passphrase.raw,
        "claimed_vote": claim.claimed_vote.value,
        "filed_at": claim.filed_at.isoformat(),
        "proof": (
            {"secret": claim.proof.secret, "vote": claim.proof.vote.value}
            if claim.proof
            else None
        ),
    }


def _claim_from_record(record: Mapping[str, Any]) -> disputes.DisputeClaim:
    proof = record.get("proof")
    return disputes.DisputeClaim(
        claim_id=record["claim_id"],
        voter_id=record["voter_id"],
        passphrase=Passphrase(record["passphrase"]),
        claimed_vote=Vote(record["claimed_vote"]),
        filed_at=dt.datetime.fromisoformat(record["filed_at"]),
        proof=disputes.ClaimProof(secret=proof["secret"], vote=Vote(proof["vote"]))
        if proof
        else None,
    )


def _outcome_from_record(record: Mapping[str, Any]) -> disputes.AdjudicationOutcome:
    if not record.get("classification"):
        raise NotYetAvailable(f"claim {record['claim_id']!r} has not been adjudicated")
    correction = record.get("correction")
    return disputes.AdjudicationOutcome(
        claim_id=record["claim_id"],
        classification=disputes.Classification(record["classification"]),
        rationale=record.get("rationale", ""),
        correction=disputes.Correction(
            passphrase=correction["passphrase"],
            display=correction["display"],
            old_vote=Vote(correction["old_vote"]),
            new_vote=Vote(correction["new_vote"]),
        )
        if correction
        else None,
        proven=record.get("proven", False),
    )
