"""The verification prompt: grouped, sorted, numbered (passphrase, vote) pairs.

The rendered text is the artifact voters check, so its byte layout is fixed:

    Referendum: <id>
    <blank>
    YES:
    1. <passphrase>
    ...
    <blank>
    NO:
    ...
    <blank>
    ABSTAIN:
    ...
    <blank>
    Tally
    YES: <n>
    NO: <n>
    ABSTAIN: <n>

Groups are sorted by the canonical comparison form of the passphrase (code
point order); ties keep submission order; display text stays as entered.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import MalformedPrompt
from .model import BallotEntry, Passphrase, Vote, VoteTable, VOTE_ORDER, normalize_phrase

_NUMBERED_LINE = re.compile(r"^(\d+)\. (.*)$")
_HEADER_LINE = re.compile(r"^Referendum: (.+)$")
_TALLY_LINE = re.compile(r"^(YES|NO|ABSTAIN): (\d+)$")


@dataclass(frozen=True)
class PromptLine:
    vote: Vote
    index: int        # 1-based position within its group
    passphrase: str   # raw display text


@dataclass(frozen=True)
class VerificationPrompt:
    referendum_id: str
    groups: Mapping[Vote, tuple[PromptLine, ...]]
    tally: Mapping[Vote, int]

    def lines(self) -> tuple[PromptLine, ...]:
        return tuple(line for vote in VOTE_ORDER for line in self.groups[vote])

    def total_entries(self) -> int:
        return sum(len(self.groups[vote]) for vote in VOTE_ORDER)


@dataclass(frozen=True)
class TallyDiscrepancy:
    kind: str  # "tally" or "numbering"
    vote: Vote
    listed: int | None = None
    claimed: int | None = None
    detail: str | None = None


def table_pairs(table: VoteTable | Iterable) -> list[tuple[Passphrase, Vote]]:
    entries = table.entries if isinstance(table, VoteTable) else table
    pairs = []
    for item in entries:
        if isinstance(item, BallotEntry):
            pairs.append((item.passphrase, item.vote))
        else:
            raw, vote = item
            pairs.append((Passphrase.of(raw), Vote.parse(vote)))
    return pairs


def build_prompt(table: VoteTable | Iterable, referendum_id: str | None = None) -> VerificationPrompt:
    """Group by vote, sort each group, number contiguously from 1."""
    if referendum_id is None:
        if not isinstance(table, VoteTable):
            raise ValueError("referendum_id is required when building from bare pairs")
        referendum_id = table.referendum_id

    grouped: dict[Vote, list[Passphrase]] = {vote: [] for vote in VOTE_ORDER}
    for passphrase, vote in table_pairs(table):
        grouped[vote].append(passphrase)

    groups = {}
    for vote in VOTE_ORDER:
        # sorted() is stable, so equal keys keep submission order
        ordered = sorted(grouped[vote], key=lambda p: p.normalized)
        groups[vote] = tuple(
            PromptLine(vote=vote, index=i, passphrase=p.raw)
            for i, p in enumerate(ordered, start=1)
        )
    tally = {vote: len(groups[vote]) for vote in VOTE_ORDER}
    return VerificationPrompt(referendum_id=referendum_id, groups=groups, tally=tally)


def render_prompt(prompt: VerificationPrompt) -> str:
    out = [f"Referendum: {prompt.referendum_id}", ""]
    for vote in VOTE_ORDER:
        out.append(f"{vote.value}:")
        for line in prompt.groups[vote]:
            out.append(f"{line.index}. {line.passphrase}")
        out.append("")
    out.append("Tally")
    for vote in VOTE_ORDER:
        out.append(f"{vote.value}: {prompt.tally[vote]}")
    return "\n".join(out) + "\n"


def parse_prompt(text: str) -> VerificationPrompt:
    """Strict inverse of render_prompt. Anything off-grammar is rejected."""
    if not text.endswith("\n"):
        raise MalformedPrompt("prompt must end with a newline")
    lines = text.split("\n")[:-1]
    cursor = 0

    def take() -> str:
        nonlocal cursor
        if cursor >= len(lines):
            raise MalformedPrompt("prompt ended early")
        line = lines[cursor]
        cursor += 1
        return line

    header = _HEADER_LINE.match(take())
    if not header:
        raise MalformedPrompt("first line must name the referendum")
    referendum_id = header.group(1)
    if take() != "":
        raise MalformedPrompt("referendum line must be followed by a blank line")

    groups: dict[Vote, tuple[PromptLine, ...]] = {}
    for vote in VOTE_ORDER:
        if take() != f"{vote.value}:":
            raise MalformedPrompt(f"expected {vote.value}: group header")
        collected: list[PromptLine] = []
        while True:
            line = take()
            if line == "":
                break
            match = _NUMBERED_LINE.match(line)
            if not match:
                raise MalformedPrompt(f"unnumbered line in {vote.value} group: {line!r}")
            number = int(match.group(1))
            if number != len(collected) + 1:
                raise MalformedPrompt(
                    f"{vote.value} group numbering is not contiguous at {line!r}"
                )
            collected.append(PromptLine(vote=vote, index=number, passphrase=match.group(2)))
        groups[vote] = tuple(collected)

    if take() != "Tally":
        raise MalformedPrompt("expected Tally section")
    tally: dict[Vote, int] = {}
    for vote in VOTE_ORDER:
        match = _TALLY_LINE.match(take())
        if not match or match.group(1) != vote.value:
            raise MalformedPrompt(f"expected tally line for {vote.value}")
        tally[vote] = int(match.group(2))
        if tally[vote] != len(groups[vote]):
            raise MalformedPrompt(
                f"tally for {vote.value} is {tally[vote]} but the group lists {len(groups[vote])}"
            )
    if cursor != len(lines):
        raise MalformedPrompt("unexpected trailing content")

    return VerificationPrompt(referendum_id=referendum_id, groups=groups, tally=tally)


def check_tally(prompt: VerificationPrompt) -> list[TallyDiscrepancy]:
    """Re-check a prompt object's arithmetic and numbering."""
    discrepancies: list[TallyDiscrepancy] = []
    for vote in VOTE_ORDER:
        listed = len(prompt.groups[vote])
        claimed = prompt.tally[vote]
        if listed != claimed:
            discrepancies.append(
                TallyDiscrepancy(kind="tally", vote=vote, listed=listed, claimed=claimed)
            )
        for position, line in enumerate(prompt.groups[vote], start=1):
            if line.index != position:
                discrepancies.append(
                    TallyDiscrepancy(
                        kind="numbering",
                        vote=vote,
                        detail=f"line {position} is numbered {line.index}",
                    )
                )
                break
    return discrepancies


def find_pair(prompt: VerificationPrompt, passphrase: Passphrase | str) -> list[tuple[Vote, int]]:
    """All (vote, line number) occurrences of a passphrase, matched canonically."""
    needle = normalize_phrase(passphrase.raw if isinstance(passphrase, Passphrase) else passphrase)
    hits = []
    for vote in VOTE_ORDER:
        for line in prompt.groups[vote]:
            if normalize_phrase(line.passphrase) == needle:
                hits.append((vote, line.index))
    return hits


def read_vote_table_csv(source: TextIO | str) -> list[tuple[str, Vote]]:
    """Read (passphrase, vote) rows. A timestamp column, if present, is dropped."""
    handle = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.DictReader(handle)
    if reader.fieldnames is None:
        raise ValueError("vote table CSV has no header row")
    names = {name.strip().lower(): name for name in reader.fieldnames}
    if "passphrase" not in names or "vote" not in names:
        raise ValueError("vote table CSV must have passphrase and vote columns")
    rows = []
    for record in reader:
        rows.append((record[names["passphrase"]], Vote.parse(record[names["vote"]])))
    return rows


def write_vote_table_csv(pairs: Sequence[tuple[str, Vote]], handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["passphrase", "vote"])
    for raw, vote in pairs:
        writer.writerow([raw, vote.value])
