"""Dispute filing, adjudication, and audited correction.

A claim says "my pair is (P, V) but the prompt disagrees". The prompt decides
which of three buckets the claim lands in: the pair is present (nothing to
correct), P is present with a single different vote (correctable), or P is
missing entirely (no way to tell who is lying; the claimant is discredited
rather than the election).
"""

from __future__ import annotations

import datetime as dt
import json
import secrets
from dataclasses import dataclass
from enum import Enum

from .audit import AuditEvent, canonical_json
from .errors import IneligibleClaimant, NotCorrectable, WindowClosed, WrongPhase
from .model import Election, ElectionPhase, Passphrase, Vote, ensure_aware, utcnow
from .phrases import Commitment, verify_commitment
from .prompt import VerificationPrompt, build_prompt, find_pair, render_prompt

DISPUTE_REPORT_SCHEMA_ID = "pvv-dispute-report-v1"


class Classification(str, Enum):
    VALID_CORRECTABLE = "ValidCorrectable"
    INVALID = "Invalid"
    UNRESOLVABLE_DISCREDITATION = "UnresolvableDiscreditation"


_NATURE = {
    Classification.VALID_CORRECTABLE: "changed V",
    Classification.INVALID: "no discrepancy",
    Classification.UNRESOLVABLE_DISCREDITATION: "pair missing",
}


@dataclass(frozen=True)
class ClaimProof:
    """Opening of a commitment-mode passphrase: the secret behind the digest."""

    secret: str
    vote: Vote


@dataclass(frozen=True)
class DisputeClaim:
    claim_id: str
    voter_id: str          # confidential; never leaves the claims namespace
    passphrase: Passphrase
    claimed_vote: Vote
    filed_at: dt.datetime
    proof: ClaimProof | None = None


@dataclass(frozen=True)
class Correction:
    passphrase: str        # canonical form used for the match
    display: str           # text as it appears in the prompt
    old_vote: Vote
    new_vote: Vote


@dataclass(frozen=True)
class AdjudicationOutcome:
    claim_id: str
    classification: Classification
    rationale: str
    correction: Correction | None = None
    proven: bool = False


def dispute_window_end(election: Election) -> dt.datetime | None:
    if election.reported_at is None:
        return None
    return election.reported_at + dt.timedelta(hours=election.referendum.dispute_window_hours)


def file_claim(
    election: Election,
    voter_id: str,
    passphrase: Passphrase | str,
    claimed_vote: Vote | str,
    now: dt.datetime | None = None,
    proof: ClaimProof | None = None,
    claim_id: str | None = None,
) -> DisputeClaim:
    """Accept a discrepancy claim and append an anonymized audit event."""
    now = ensure_aware(now) if now is not None else utcnow()
    with election.lock:
        if voter_id not in election.referendum.eligible_voters:
            raise IneligibleClaimant(f"{voter_id} is not on the roster")
        if election.phase is not ElectionPhase.DISPUTE_WINDOW:
            raise WindowClosed("disputes are accepted only during the dispute window")
        window_end = dispute_window_end(election)
        if window_end is not None and now > window_end:
            raise WindowClosed("dispute window has closed")

        claim = DisputeClaim(
            claim_id=claim_id or f"claim-{secrets.token_hex(4)}",
            voter_id=voter_id,
            passphrase=Passphrase.of(passphrase),
            claimed_vote=Vote.parse(claimed_vote),
            filed_at=now,
            proof=proof,
        )
        # the broadcastable fact is the disputed pair, never who filed it
        election.audit_log.append(
            "DisputeFiled",
            {
                "claim_id": claim.claim_id,
                "passphrase": claim.passphrase.raw,
                "claimed_vote": claim.claimed_vote.value,
            },
        )
        return claim


def adjudicate(claim: DisputeClaim, prompt: VerificationPrompt) -> AdjudicationOutcome:
    """Classify a claim against the published prompt."""
    occurrences = find_pair(prompt, claim.passphrase)
    proven = _proof_holds(claim, prompt.referendum_id)

    if not occurrences:
        return AdjudicationOutcome(
            claim_id=claim.claim_id,
            classification=Classification.UNRESOLVABLE_DISCREDITATION,
            rationale=_with_proof(
                "claimed passphrase does not appear in the prompt; "
                "the record and the claim cannot be reconciled",
                proven,
            ),
            proven=proven,
        )

    matches = [(vote, idx) for vote, idx in occurrences if vote == claim.claimed_vote]
    if matches:
        return AdjudicationOutcome(
            claim_id=claim.claim_id,
            classification=Classification.INVALID,
            rationale=_with_proof(
                "the claimed pair is already listed; there is nothing to correct", proven
            ),
            proven=proven,
        )

    mismatches = [(vote, idx) for vote, idx in occurrences if vote != claim.claimed_vote]
    if len(mismatches) != 1:
        # several entries share the phrase and disagree; no single correction exists
        return AdjudicationOutcome(
            claim_id=claim.claim_id,
            classification=Classification.UNRESOLVABLE_DISCREDITATION,
            rationale=_with_proof(
                "the passphrase appears multiple times with differing votes; "
                "no unique correction can be identified",
                proven,
            ),
            proven=proven,
        )

    old_vote, index = mismatches[0]
    display = prompt.groups[old_vote][index - 1].passphrase
    return AdjudicationOutcome(
        claim_id=claim.claim_id,
        classification=Classification.VALID_CORRECTABLE,
        rationale=_with_proof(
            f"prompt lists the pair under {old_vote.value}; claim says {claim.claimed_vote.value}",
            proven,
        ),
        correction=Correction(
            passphrase=claim.passphrase.normalized,
            display=display,
            old_vote=old_vote,
            new_vote=claim.claimed_vote,
        ),
        proven=proven,
    )


def _proof_holds(claim: DisputeClaim, referendum_id: str) -> bool:
    if claim.proof is None:
        return False
    commitment = Commitment(digest=claim.passphrase.normalized)
    return (
        claim.proof.vote == claim.claimed_vote
        and verify_commitment(commitment, claim.proof.secret, claim.proof.vote, referendum_id)
    )


def _with_proof(rationale: str, proven: bool) -> str:
    return rationale + ("; proven by commitment opening" if proven else "")


def apply_correction(
    election: Election, outcome: AdjudicationOutcome
) -> tuple[VerificationPrompt, AuditEvent]:
    """Fix the recorded vote, rebuild the prompt, and audit the change."""
    if outcome.classification is not Classification.VALID_CORRECTABLE or outcome.correction is None:
        raise NotCorrectable(f"claim is classified {outcome.classification.value}")
    correction = outcome.correction
    with election.lock:
        if election.phase is not ElectionPhase.DISPUTE_WINDOW:
            raise WrongPhase("corrections are applied during the dispute window")
        election.correct_entry(correction.passphrase, correction.old_vote, correction.new_vote)
        corrected = build_prompt(election.vote_table)
        election.apply_prompt_revision(
            render_prompt(corrected),
            {
                "claim_id": outcome.claim_id,
                "passphrase": correction.display,
                "from": correction.old_vote.value,
                "to": correction.new_vote.value,
            },
        )
        return corrected, election.audit_log.events[-1]


@dataclass(frozen=True)
class DisputeReport:
    referendum_id: str
    claim_count: int
    claims: tuple[dict, ...]

    def to_document(self) -> dict:
        return {
            "schema_id": DISPUTE_REPORT_SCHEMA_ID,
            "referendum_id": self.referendum_id,
            "claim_count": self.claim_count,
            "claims": [dict(row) for row in self.claims],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dispute_report(
    referendum_id: str,
    claims: list[DisputeClaim],
    outcomes: dict[str, AdjudicationOutcome],
) -> DisputeReport:
    """Published summary: what was claimed and how it resolved. No identities."""
    rows = []
    for claim in claims:
        outcome = outcomes.get(claim.claim_id)
        classification = outcome.classification if outcome else None
        rows.append(
            {
                "claim_id": claim.claim_id,
                "nature": _NATURE[classification] if classification else "pending",
                "classification": classification.value if classification else "pending",
                "resolved": bool(
                    classification
                    and classification is not Classification.UNRESOLVABLE_DISCREDITATION
                ),
            }
        )
    report = DisputeReport(
        referendum_id=referendum_id, claim_count=len(claims), claims=tuple(rows)
    )
    # canonical form must exist; building it here keeps failures close to the cause
    canonical_json(report.to_document())
    return report
