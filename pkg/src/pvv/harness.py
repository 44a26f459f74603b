"""Adversary simulation: a corrupt administrator edits the stored vote table
between the close of voting and publication, and we measure which edits the
published checks actually catch.

Checks run in a fixed order so every scenario attributes detection to the
earliest check that fires:

1. VoterPairCheck   each verifying voter looks up their own pair in the prompt
2. CountCheck       prompt row total vs the count announced at close
3. ChainCheck       audit log hash chain verification
"""

from __future__ import annotations

import datetime as dt
import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .audit import verify_chain
from .model import BallotEntry, ElectionPhase, Passphrase, Vote
from .phrases import DEFAULT_WORDLIST
from .prompt import find_pair, parse_prompt
from .service import RoleAssignment, VotingService
from .store import KeyValueStore

SCENARIO_SCHEMA_ID = "pvv-scenario-v1"

_FIXED_NOW = dt.datetime(2026, 3, 2, 9, 0, tzinfo=dt.timezone.utc)

DETECTORS = ("VoterPairCheck", "CountCheck", "ChainCheck")


@dataclass(frozen=True)
class Scenario:
    """One deterministic run: an electorate, a behavior profile, one attack."""

    name: str
    n_voters: int
    passphrase_policy: str = "distinct"  # or "force-duplicate"
    voter_behaviors: str | tuple[str, ...] = "verify"
    adversary_action: Mapping[str, Any] | None = None
    seed: int = 0

    def behavior(self, voter_index: int) -> str:
        if isinstance(self.voter_behaviors, str):
            return self.voter_behaviors
        return self.voter_behaviors[voter_index]

    def to_dict(self) -> dict:
        return {
            "schema_id": SCENARIO_SCHEMA_ID,
            "name": self.name,
            "n_voters": self.n_voters,
            "passphrase_policy": self.passphrase_policy,
            "voter_behaviors": (
                self.voter_behaviors
                if isinstance(self.voter_behaviors, str)
                else list(self.voter_behaviors)
            ),
            "adversary_action": dict(self.adversary_action)
            if self.adversary_action
            else None,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Scenario":
        if data.get("schema_id", SCENARIO_SCHEMA_ID) != SCENARIO_SCHEMA_ID:
            raise ValueError(f"unsupported scenario schema: {data.get('schema_id')!r}")
        behaviors = data.get("voter_behaviors", "verify")
        if isinstance(behaviors, list):
            behaviors = tuple(behaviors)
        return cls(
            name=data["name"],
            n_voters=data["n_voters"],
            passphrase_policy=data.get("passphrase_policy", "distinct"),
            voter_behaviors=behaviors,
            adversary_action=data.get("adversary_action"),
            seed=data.get("seed", 0),
        )


@dataclass(frozen=True)
class DetectionResult:
    scenario: str
    detected: bool
    detector: str | None
    transcript: tuple[str, ...]


def _draw_phrase(rng: random.Random, taken: set[str]) -> Passphrase:
    # retry until normalized-distinct; two draws from a ~190 word list collide
    # rarely at harness sizes, so this terminates fast
    while True:
        words = f"{rng.choice(DEFAULT_WORDLIST.words)} {rng.choice(DEFAULT_WORDLIST.words)}"
        phrase = Passphrase(words)
        if phrase.normalized not in taken:
            taken.add(phrase.normalized)
            return phrase


def _voter_ids(n: int) -> list[str]:
    width = max(2, len(str(n)))
    return [f"v{i + 1:0{width}d}" for i in range(n)]


def _resolve_target(scenario: Scenario, action: Mapping[str, Any]) -> int:
    target = action.get("target", 0)
    if target == "non-verifier":
        for i in range(scenario.n_voters):
            if scenario.behavior(i) != "verify":
                return i
        raise ValueError("scenario has no non-verifying voter to target")
    return int(target)


def _flip(vote: Vote) -> Vote:
    return Vote.NO if vote is Vote.YES else Vote.YES


def run_scenario(scenario: Scenario) -> DetectionResult:
    rng = random.Random(scenario.seed)
    transcript: list[str] = [f"scenario {scenario.name} seed={scenario.seed}"]

    roles = RoleAssignment(
        ea=frozenset({"ea"}), chair="chair", t1="t1", t2="t2", panel=frozenset({"panel"})
    )
    voters = _voter_ids(scenario.n_voters)
    service = VotingService(
        store=KeyValueStore(), roles=roles, clock=lambda: _FIXED_NOW
    )
    ea = service.create_session("ea")
    rid = f"sim-{scenario.name}"
    service.create_referendum(
        ea,
        {
            "referendum_id": rid,
            "question": "simulation",
            "date": _FIXED_NOW.date().isoformat(),
            "eligible_voters": voters,
        },
    )
    service.advance_phase(ea, rid, ElectionPhase.VOTING_OPEN)

    taken: set[str] = set()
    phrases: list[Passphrase] = []
    votes: list[Vote] = []
    for i, voter in enumerate(voters):
        phrase = _draw_phrase(rng, taken)
        vote = rng.choice([Vote.YES, Vote.NO, Vote.ABSTAIN])
        if scenario.passphrase_policy == "force-duplicate" and i == 1:
            phrase, vote = phrases[0], votes[0]
        phrases.append(phrase)
        votes.append(vote)
        token = service.issue_token(service.create_session(voter), rid)
        service.cast_ballot(rid, token.value, phrase.raw, vote)
    transcript.append(f"cast {scenario.n_voters} ballots")

    announced = service.live_count(rid)
    transcript.append(f"announced count {announced}")
    service.advance_phase(ea, rid, ElectionPhase.VOTING_CLOSED)

    election = service.election(rid)
    action = scenario.adversary_action
    if action is not None:
        _apply_attack(election, scenario, action, phrases, votes, rng, transcript)

    prompt_text = service.publish_prompt(ea, rid)
    service.advance_phase(ea, rid, ElectionPhase.VERIFICATION_OPEN)
    prompt = parse_prompt(prompt_text)
    transcript.append(f"published prompt with {prompt.total_entries()} entries")

    detected, detector = _run_checks(
        scenario, prompt, phrases, votes, announced, election, transcript
    )
    transcript.append(
        f"result detected={detected} detector={detector or 'none'}"
    )
    return DetectionResult(
        scenario=scenario.name,
        detected=detected,
        detector=detector,
        transcript=tuple(transcript),
    )


def _apply_attack(election, scenario: Scenario, action: Mapping[str, Any],
                  phrases: list[Passphrase], votes: list[Vote],
                  rng: random.Random, transcript: list[str]) -> None:
    # direct mutation of the stored table models an administrator editing the
    # raw store; nothing on this path appends audit events
    entries = election.vote_table._entries
    kind = action["kind"]
    if kind == "flip_vote":
        index = _resolve_target(scenario, action)
        old = entries[index]
        entries[index] = BallotEntry(
            passphrase=old.passphrase,
            vote=_flip(old.vote),
            seq=old.seq,
            submitted_at=old.submitted_at,
            absentee=old.absentee,
        )
        transcript.append(f"adversary flip_vote entry={index}")
    elif kind == "insert_ballot":
        taken = {p.normalized for p in phrases}
        forged = _draw_phrase(rng, taken)
        entries.append(
            BallotEntry(
                passphrase=forged,
                vote=rng.choice([Vote.YES, Vote.NO]),
                seq=len(entries),
                submitted_at=_FIXED_NOW,
                absentee=False,
            )
        )
        transcript.append("adversary insert_ballot")
    elif kind == "delete_ballot":
        index = _resolve_target(scenario, action)
        del entries[index]
        transcript.append(f"adversary delete_ballot entry={index}")
    elif kind == "alter_passphrase":
        index = _resolve_target(scenario, action)
        taken = {p.normalized for p in phrases}
        replacement = _draw_phrase(rng, taken)
        old = entries[index]
        entries[index] = BallotEntry(
            passphrase=replacement,
            vote=old.vote,
            seq=old.seq,
            submitted_at=old.submitted_at,
            absentee=old.absentee,
        )
        transcript.append(f"adversary alter_passphrase entry={index}")
    else:
        raise ValueError(f"unknown adversary action: {kind!r}")


def _run_checks(scenario: Scenario, prompt, phrases: list[Passphrase],
                votes: list[Vote], announced: int, election,
                transcript: list[str]) -> tuple[bool, str | None]:
    for i in range(scenario.n_voters):
        if scenario.behavior(i) != "verify":
            continue
        occurrences = find_pair(prompt, phrases[i])
        satisfied = any(vote is votes[i] for vote, _ in occurrences)
        if not satisfied:
            transcript.append(f"voter {i} pair check failed")
            return True, "VoterPairCheck"
    transcript.append("pair checks passed")

    if prompt.total_entries() != announced:
        transcript.append(
            f"count check failed: {prompt.total_entries()} != {announced}"
        )
        return True, "CountCheck"
    transcript.append("count check passed")

    chain = verify_chain(election.audit_log.events)
    if not chain.ok:
        transcript.append(f"chain check failed at {chain.first_invalid_index}")
        return True, "ChainCheck"
    transcript.append("chain check passed")
    return False, None


@dataclass(frozen=True)
class MatrixRow:
    action: str
    trials: int
    detected: int

    @property
    def rate(self) -> float:
        return self.detected / self.trials if self.trials else 0.0


def standard_scenarios(n_voters: int = 25) -> list[Scenario]:
    """The five attack profiles the detection table reports on."""
    skip_first = ("skip-verify",) + ("verify",) * (n_voters - 1)
    return [
        Scenario(
            name="flip-vote-verified",
            n_voters=n_voters,
            adversary_action={"kind": "flip_vote", "target": 0},
        ),
        Scenario(
            name="insert-ballot",
            n_voters=n_voters,
            adversary_action={"kind": "insert_ballot"},
        ),
        Scenario(
            name="flip-duplicate-copy",
            n_voters=n_voters,
            passphrase_policy="force-duplicate",
            adversary_action={"kind": "flip_vote", "target": 1},
        ),
        Scenario(
            name="flip-nonverifier",
            n_voters=n_voters,
            voter_behaviors=skip_first,
            adversary_action={"kind": "flip_vote", "target": "non-verifier"},
        ),
        Scenario(
            name="alter-passphrase",
            n_voters=n_voters,
            adversary_action={"kind": "alter_passphrase", "target": 0},
        ),
    ]


def run_matrix(scenarios: Sequence[Scenario], n_trials: int,
               seed: int = 0) -> list[MatrixRow]:
    rows = []
    for index, template in enumerate(scenarios):
        detected = 0
        for trial in range(n_trials):
            trial_seed = seed + 100003 * index + 1009 * trial
            scenario = Scenario(
                name=template.name,
                n_voters=template.n_voters,
                passphrase_policy=template.passphrase_policy,
                voter_behaviors=template.voter_behaviors,
                adversary_action=template.adversary_action,
                seed=trial_seed,
            )
            if run_scenario(scenario).detected:
                detected += 1
        rows.append(MatrixRow(action=template.name, trials=n_trials, detected=detected))
    return rows


def matrix_csv(rows: Sequence[MatrixRow]) -> str:
    lines = ["action,trials,detected,rate"]
    for row in rows:
        lines.append(f"{row.action},{row.trials},{row.detected},{row.rate}")
    return "\n".join(lines) + "\n"
