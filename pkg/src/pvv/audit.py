"""Append-only audit log and published audit bundle.

Every state-changing act appends an event to a hash chain; the chain head is
embedded in each published bundle so later tampering with either is evident.
Events never carry ballot-to-identity associations and bundles never carry
timestamps.
"""

from __future__ import annotations

import difflib
import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Sequence

from .errors import LogSealed, PrivacyViolation, ReferendumMismatch, WrongPhase

if TYPE_CHECKING:  # pragma: no cover
    from .model import Election

LOG_SCHEMA_ID = "pvv-audit-v1"
BUNDLE_SCHEMA_ID = "pvv-bundle-v1"

# prev_hash of the first event; fixed so an empty log has a well-defined head
GENESIS_PREV_HASH = "0" * 64

_EVENT_KEYS = {"schema_id", "index", "kind", "payload", "prev_hash", "hash"}


class AuditEventKind(str, Enum):
    PHASE_CHANGE = "PhaseChange"
    BALLOT_ACCEPTED = "BallotAccepted"
    PROMPT_PUBLISHED = "PromptPublished"
    VERIFICATION_RECORDED = "VerificationRecorded"
    ABSENTEE_ACK = "AbsenteeAck"
    DISPUTE_FILED = "DisputeFiled"
    CORRECTION_APPLIED = "CorrectionApplied"
    BUNDLE_SEALED = "BundleSealed"


def canonical_json(obj: Any) -> str:
    """Serialize with sorted keys and no incidental whitespace.

    The same input always produces the same bytes, so hashes over this form
    are stable across runs and platforms.
    """
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def event_hash(index: int, kind: str, payload: str, prev_hash: str) -> str:
    material = f"{index}\n{kind}\n{payload}\n{prev_hash}".encode("utf-8")
    return hashlib.sha256(material).hexdigest()


@dataclass(frozen=True)
class AuditEvent:
    index: int          # 1-based position in the chain
    kind: str
    payload: str        # canonical JSON text, hashed byte-for-byte as stored
    prev_hash: str
    hash: str

    def payload_dict(self) -> dict:
        return json.loads(self.payload)

    def to_record(self) -> dict:
        return {
            "schema_id": LOG_SCHEMA_ID,
            "index": self.index,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "hash": self.hash,
        }


@dataclass(frozen=True)
class ChainVerification:
    ok: bool
    first_invalid_index: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


class AuditLog:
    """Hash-chained, append-only event log for one referendum."""

    def __init__(self, events: Iterable[AuditEvent] = (), sealed: bool = False):
        self._events: list[AuditEvent] = list(events)
        self._sealed = sealed

    @property
    def events(self) -> tuple[AuditEvent, ...]:
        return tuple(self._events)

    @property
    def sealed(self) -> bool:
        return self._sealed

    @property
    def head_hash(self) -> str:
        return self._events[-1].hash if self._events else GENESIS_PREV_HASH

    def __len__(self) -> int:
        return len(self._events)

    def append(self, kind: AuditEventKind | str, payload: Mapping[str, Any]) -> AuditEvent:
        if self._sealed:
            raise LogSealed("audit log is sealed; no further events may be appended")
        kind_value = kind.value if isinstance(kind, AuditEventKind) else str(kind)
        index = len(self._events) + 1
        payload_json = canonical_json(dict(payload))
        prev = self.head_hash
        event = AuditEvent(
            index=index,
            kind=kind_value,
            payload=payload_json,
            prev_hash=prev,
            hash=event_hash(index, kind_value, payload_json, prev),
        )
        self._events.append(event)
        return event

    def seal(self) -> None:
        self._sealed = True

    def verify(self) -> ChainVerification:
        return verify_chain(self._events)

    def to_jsonl(self) -> str:
        return "".join(canonical_json(e.to_record()) + "\n" for e in self._events)

    @classmethod
    def from_records(cls, records: Iterable[Mapping[str, Any]],
                     sealed: bool = False) -> "AuditLog":
        """Rebuild from stored event records, validating each strictly."""
        return cls((_event_from_record(r) for r in records), sealed=sealed)

    @classmethod
    def from_jsonl(cls, text: str, sealed: bool = False) -> "AuditLog":
        events = []
        for line in text.splitlines():
            if not line.strip():
                continue
            events.append(_event_from_record(json.loads(line)))
        return cls(events, sealed=sealed)


def verify_chain(events: Sequence[AuditEvent]) -> ChainVerification:
    """Walk the chain; report the first position whose links do not hold."""
    prev = GENESIS_PREV_HASH
    for position, event in enumerate(events, start=1):
        if event.index != position:
            return ChainVerification(False, position, "index out of sequence")
        if event.prev_hash != prev:
            return ChainVerification(False, position, "broken link to previous event")
        expected = event_hash(event.index, event.kind, event.payload, event.prev_hash)
        if expected != event.hash:
            return ChainVerification(False, position, "stored hash does not match content")
        prev = event.hash
    return ChainVerification(True)


def _event_from_record(record: Any) -> AuditEvent:
    if not isinstance(record, dict) or set(record) != _EVENT_KEYS:
        raise ValueError("unexpected event fields")
    if record["schema_id"] != LOG_SCHEMA_ID:
        raise ValueError("unexpected schema_id")
    if not isinstance(record["index"], int) or isinstance(record["index"], bool):
        raise ValueError("index must be an integer")
    for key in ("kind", "payload", "prev_hash", "hash"):
        if not isinstance(record[key], str):
            raise ValueError(f"{key} must be a string")
    return AuditEvent(
        index=record["index"],
        kind=record["kind"],
        payload=record["payload"],
        prev_hash=record["prev_hash"],
        hash=record["hash"],
    )


def verify_log_lines(text: str) -> ChainVerification:
    """Verify a JSONL export. Unparseable or malformed lines count as broken
    at their position, same as a failed hash."""
    events: list[AuditEvent] = []
    lines = [line for line in text.split("\n") if line != ""]
    for position, line in enumerate(lines, start=1):
        try:
            record = json.loads(line)
            event = _event_from_record(record)
        except ValueError:
            return ChainVerification(False, position, "event record is malformed")
        events.append(event)
    return verify_chain(events)


# --- published bundle -------------------------------------------------------

_VOTE_ORDER = ("YES", "NO", "ABSTAIN")

# key names that would smuggle a timestamp into a published artifact
_FORBIDDEN_KEY_MARKERS = ("timestamp", "_at", "time")
_ALLOWED_TIME_KEYS = {"date"}


@dataclass(frozen=True)
class AuditBundle:
    """Everything published after a referendum is reported.

    vote_table rows are (passphrase, vote) in submission order with internal
    sequencing and timestamps removed; the verification table names who
    attested, which is public by design.
    """

    referendum_id: str
    date: str
    eligible_voters: tuple[str, ...]
    absentee_voters: tuple[str, ...]
    non_voters: tuple[str, ...]
    vote_table: tuple[dict, ...]
    verification_prompt: str
    verification_table: tuple[dict, ...]
    dispute_summary: dict = field(default_factory=dict)
    chain_head_hash: str = GENESIS_PREV_HASH
    revision: int = 0

    def to_document(self) -> dict:
        return {
            "schema_id": BUNDLE_SCHEMA_ID,
            "referendum_id": self.referendum_id,
            "date": self.date,
            "eligible_voters": list(self.eligible_voters),
            "absentee_voters": list(self.absentee_voters),
            "non_voters": list(self.non_voters),
            "vote_table": [dict(row) for row in self.vote_table],
            "verification_prompt": self.verification_prompt,
            "verification_table": [dict(row) for row in self.verification_table],
            "dispute_summary": dict(self.dispute_summary),
            "chain_head_hash": self.chain_head_hash,
            "revision": self.revision,
        }

    def to_json(self) -> str:
        # sorted keys, UTF-8, LF line endings, trailing newline
        return json.dumps(self.to_document(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "AuditBundle":
        if doc.get("schema_id") != BUNDLE_SCHEMA_ID:
            raise ValueError("unexpected bundle schema_id")
        return cls(
            referendum_id=doc["referendum_id"],
            date=doc["date"],
            eligible_voters=tuple(doc["eligible_voters"]),
            absentee_voters=tuple(doc["absentee_voters"]),
            non_voters=tuple(doc["non_voters"]),
            vote_table=tuple(dict(r) for r in doc["vote_table"]),
            verification_prompt=doc["verification_prompt"],
            verification_table=tuple(dict(r) for r in doc["verification_table"]),
            dispute_summary=dict(doc.get("dispute_summary", {})),
            chain_head_hash=doc["chain_head_hash"],
            revision=int(doc.get("revision", 0)),
        )


def scan_for_identities(serialized: str, identities: Iterable[str]) -> list[str]:
    """Return identities appearing as substrings of a serialized artifact."""
    return [ident for ident in identities if ident and ident in serialized]


def _scan_keys_for_timestamps(obj: Any, path: str = "") -> list[str]:
    found = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            lowered = str(key).lower()
            if lowered not in _ALLOWED_TIME_KEYS and any(
                marker in lowered for marker in _FORBIDDEN_KEY_MARKERS
            ):
                found.append(f"{path}{key}")
            found.extend(_scan_keys_for_timestamps(value, f"{path}{key}."))
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            found.extend(_scan_keys_for_timestamps(value, f"{path}{i}."))
    return found


def assemble_bundle(election: "Election", dispute_summary: Mapping[str, Any] | None = None) -> AuditBundle:
    """Build the publishable bundle for an election and append BundleSealed.

    Assembling at the Final phase seals the log; earlier assemblies (the
    report published at the meeting) leave it open for the dispute window.
    """
    report = election.participation_report()
    prompt_text = election.current_prompt_text
    if prompt_text is None:
        raise WrongPhase("no prompt has been published for this referendum")

    rows = tuple(
        {"passphrase": entry.passphrase.raw, "vote": entry.vote.value}
        for entry in election.vote_table.entries
    )
    verification_table = tuple(
        {"voter_id": voter_id, "attested": attested, "note": note}
        for voter_id, (attested, note) in sorted(election.attestations.items())
    )
    summary = dict(dispute_summary) if dispute_summary is not None else {"claim_count": 0, "claims": []}

    bundle = AuditBundle(
        referendum_id=election.referendum.referendum_id,
        date=election.referendum.date.isoformat(),
        eligible_voters=tuple(sorted(election.referendum.eligible_voters)),
        absentee_voters=tuple(sorted(report.absentee)),
        non_voters=tuple(sorted(report.did_not_vote)),
        vote_table=rows,
        verification_prompt=prompt_text,
        verification_table=verification_table,
        dispute_summary=summary,
        chain_head_hash=election.audit_log.head_hash,
        revision=election.bundle_revisions,
    )

    _assert_publishable(bundle, election.referendum.eligible_voters)

    election.audit_log.append(
        AuditEventKind.BUNDLE_SEALED,
        {"revision": bundle.revision, "bundle_hash": bundle.content_hash()},
    )
    election.bundle_revisions += 1
    if election.phase.name == "FINAL":
        election.audit_log.seal()
    return bundle


def _assert_publishable(bundle: AuditBundle, identities: Iterable[str]) -> None:
    table_text = canonical_json(list(bundle.vote_table)) + bundle.verification_prompt
    leaked = scan_for_identities(table_text, identities)
    if leaked:
        raise PrivacyViolation(f"voter identity would appear beside votes: {leaked}")
    stamped = _scan_keys_for_timestamps(bundle.to_document())
    if stamped:
        raise PrivacyViolation(f"timestamp field would be published: {stamped}")


# --- bundle comparison -------------------------------------------------------

@dataclass(frozen=True)
class BundleDiff:
    changed_fields: dict
    table_added: tuple[tuple[str, str], ...]
    table_removed: tuple[tuple[str, str], ...]
    prompt_changes: tuple[str, ...]
    tally_change: dict

    @property
    def is_empty(self) -> bool:
        return not (
            self.changed_fields
            or self.table_added
            or self.table_removed
            or self.prompt_changes
            or self.tally_change
        )


def _recount(table: Sequence[Mapping[str, str]]) -> dict:
    counts = Counter(row["vote"] for row in table)
    return {vote: counts.get(vote, 0) for vote in _VOTE_ORDER}


def diff_bundles(a: AuditBundle, b: AuditBundle) -> BundleDiff:
    """Field-level comparison of two bundle revisions of one referendum."""
    if a.referendum_id != b.referendum_id:
        raise ReferendumMismatch(
            f"cannot compare bundles for {a.referendum_id!r} and {b.referendum_id!r}"
        )

    changed: dict = {}
    for name in ("date", "eligible_voters", "absentee_voters", "non_voters",
                 "verification_table", "dispute_summary"):
        if getattr(a, name) != getattr(b, name):
            changed[name] = (getattr(a, name), getattr(b, name))
    if len(a.vote_table) != len(b.vote_table):
        changed["vote_table_size"] = (len(a.vote_table), len(b.vote_table))

    pairs_a = Counter((r["passphrase"], r["vote"]) for r in a.vote_table)
    pairs_b = Counter((r["passphrase"], r["vote"]) for r in b.vote_table)
    removed = tuple(sorted((pairs_a - pairs_b).elements()))
    added = tuple(sorted((pairs_b - pairs_a).elements()))

    prompt_changes = tuple(
        line for line in difflib.ndiff(
            a.verification_prompt.splitlines(), b.verification_prompt.splitlines()
        )
        if line.startswith(("- ", "+ "))
    )

    tally_a, tally_b = _recount(a.vote_table), _recount(b.vote_table)
    tally_change = {
        vote: (tally_a[vote], tally_b[vote])
        for vote in _VOTE_ORDER
        if tally_a[vote] != tally_b[vote]
    }

    return BundleDiff(
        changed_fields=changed,
        table_added=added,
        table_removed=removed,
        prompt_changes=prompt_changes,
        tally_change=tally_change,
    )
