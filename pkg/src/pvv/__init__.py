"""Phrase-verified voting: anonymous ballots a voter can check by eye.

Each voter submits a self-chosen passphrase next to their vote through a
one-time token. After voting closes, the full (passphrase, vote) table is
published in a canonical collated form, every voter confirms their own line,
and mismatches go through a dispute process. An append-only hash-chained
audit log and a published bundle make after-the-fact edits detectable.
"""

from .audit import (
    AuditBundle,
    AuditEvent,
    AuditEventKind,
    AuditLog,
    ChainVerification,
    assemble_bundle,
    canonical_json,
    diff_bundles,
    verify_chain,
    verify_log_lines,
)
from .disputes import (
    AdjudicationOutcome,
    Classification,
    ClaimProof,
    DisputeClaim,
    adjudicate,
    apply_correction,
    dispute_report,
    file_claim,
)
from .errors import PvvError
from .harness import (
    DetectionResult,
    Scenario,
    run_matrix,
    run_scenario,
    standard_scenarios,
)
from .model import (
    BallotEntry,
    Election,
    ElectionPhase,
    Passphrase,
    Referendum,
    Role,
    TokenState,
    Vote,
    VoteTable,
    normalize_phrase,
)
from .phrases import (
    Commitment,
    PhraseWarning,
    Wordlist,
    collision_probability,
    commit,
    detect_collisions,
    suggest,
    validate,
    verify_commitment,
)
from .prompt import (
    VerificationPrompt,
    build_prompt,
    check_tally,
    find_pair,
    parse_prompt,
    read_vote_table_csv,
    render_prompt,
    write_vote_table_csv,
)
from .service import RoleAssignment, Session, VotingService
from .store import KeyValueStore, Namespace

__version__ = "0.1.0"

__all__ = [
    "AdjudicationOutcome",
    "AuditBundle",
    "AuditEvent",
    "AuditEventKind",
    "AuditLog",
    "BallotEntry",
    "ChainVerification",
    "Classification",
    "ClaimProof",
    "Commitment",
    "DetectionResult",
    "DisputeClaim",
    "Election",
    "ElectionPhase",
    "KeyValueStore",
    "Namespace",
    "Passphrase",
    "PhraseWarning",
    "PvvError",
    "Referendum",
    "Role",
    "RoleAssignment",
    "Scenario",
    "Session",
    "TokenState",
    "VerificationPrompt",
    "Vote",
    "VoteTable",
    "VotingService",
    "Wordlist",
    "adjudicate",
    "apply_correction",
    "assemble_bundle",
    "build_prompt",
    "canonical_json",
    "check_tally",
    "collision_probability",
    "commit",
    "detect_collisions",
    "diff_bundles",
    "dispute_report",
    "file_claim",
    "find_pair",
    "normalize_phrase",
    "parse_prompt",
    "read_vote_table_csv",
    "render_prompt",
    "run_matrix",
    "run_scenario",
    "standard_scenarios",
    "suggest",
    "validate",
    "verify_chain",
    "verify_commitment",
    "verify_log_lines",
    "write_vote_table_csv",
]
