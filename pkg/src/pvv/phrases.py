"""Passphrase guidance, the collision model, and the commitment variant.

Guidance never blocks a ballot: a voter may use any tag they like, warnings
exist so they understand what a weak or shared tag costs them.
"""

from __future__ import annotations

import hashlib
import hmac
import math
import random
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import InvalidModel, UnknownScheme, WeakSecret
from .model import Passphrase, Vote, VOTE_ORDER, normalize_phrase
from .prompt import table_pairs

COMMIT_SCHEME_V1 = "pvv-commit-v1"
MIN_SECRET_BYTES = 16

# phrases with no guessing resistance worth mentioning
_DENYLIST = frozenset({"abc def", "dog cat", "one two", "test test", "yes yes", "no no"})


class PhraseWarning(str, Enum):
    NOT_TWO_WORDS = "NotTwoWords"
    LOW_ENTROPY = "LowEntropy"
    POSSIBLE_INITIALS = "PossibleInitials"
    REUSED_PHRASE = "ReusedPhrase"


@dataclass(frozen=True)
class ValidationReport:
    passphrase: Passphrase
    warnings: tuple[PhraseWarning, ...]


def validate(raw: str, previously_used: Iterable[str] = ()) -> ValidationReport:
    """Structural checks raise; everything else is advisory."""
    passphrase = Passphrase.of(raw)
    tokens = passphrase.normalized.split(" ")
    warnings: list[PhraseWarning] = []

    if len(tokens) != 2 or any(not token.isalnum() for token in tokens):
        warnings.append(PhraseWarning.NOT_TWO_WORDS)
    if any(len(token) <= 2 for token in tokens) or passphrase.normalized in _DENYLIST:
        warnings.append(PhraseWarning.LOW_ENTROPY)
    if any(2 <= len(token) <= 3 and token.isalpha() for token in tokens):
        warnings.append(PhraseWarning.POSSIBLE_INITIALS)
    if passphrase.normalized in {normalize_phrase(p) for p in previously_used}:
        warnings.append(PhraseWarning.REUSED_PHRASE)

    return ValidationReport(passphrase=passphrase, warnings=tuple(warnings))


@dataclass(frozen=True)
class CollisionGroup:
    normalized: str
    count: int
    votes: tuple[Vote, ...]


def detect_collisions(table) -> list[CollisionGroup]:
    """Groups of ballots sharing one canonical passphrase."""
    by_phrase: dict[str, list[Vote]] = {}
    for passphrase, vote in table_pairs(table):
        by_phrase.setdefault(passphrase.normalized, []).append(vote)
    groups = []
    for normalized in sorted(by_phrase):
        votes = by_phrase[normalized]
        if len(votes) > 1:
            counts = Counter(votes)
            ordered = tuple(v for v in VOTE_ORDER for _ in range(counts.get(v, 0)))
            groups.append(CollisionGroup(normalized=normalized, count=len(votes), votes=ordered))
    return groups


def collision_probability(n_voters: int, wordlist_size: int) -> float:
    """Chance that at least two of n voters pick the same two-word phrase.

    Models each phrase as two independent uniform draws from the wordlist, so the
    phrase space has wordlist_size**2 points; computed in log space so tiny
    probabilities stay exact.
    """
    if n_voters < 0:
        raise InvalidModel("voter count cannot be negative")
    if wordlist_size < 1:
        raise InvalidModel("wordlist must have at least one word")
    if n_voters <= 1:
        return 0.0
    space = wordlist_size ** 2
    if n_voters > space:
        return 1.0
    log_no_collision = sum(math.log1p(-k / space) for k in range(1, n_voters))
    return -math.expm1(log_no_collision)


class Wordlist:
    """Suggestion vocabulary: distinct lowercase single words."""

    def __init__(self, words: Iterable[str]):
        cleaned = tuple(words)
        if len(cleaned) < 2:
            raise ValueError("wordlist needs at least two words")
        seen = set()
        for word in cleaned:
            if not word or any(ch.isspace() for ch in word):
                raise ValueError(f"wordlist entries must be single words: {word!r}")
            if word != word.casefold():
                raise ValueError(f"wordlist entries must be lowercase: {word!r}")
            if word in seen:
                raise ValueError(f"duplicate wordlist entry: {word!r}")
            seen.add(word)
        self.words = cleaned

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def load(cls, path) -> "Wordlist":
        words = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                word = line.split("#", 1)[0].strip()
                if word:
                    words.append(word)
        return cls(words)


DEFAULT_WORDLIST = Wordlist(
    "acorn amber anchor anvil apron arrow aspen autumn badge bamboo banjo barley "
    "basket beacon bellow birch bishop blanket bonfire border bottle boulder bramble "
    "brass breeze brick bridge bronze brook bucket burrow butter cabin camera candle "
    "canoe canyon carpet cedar cellar chalk chapel cherry chisel cinder circle citrus "
    "clover cobalt comet copper coral cotton cradle crater crimson crystal cypress "
    "daisy dapple desert drift dusk ember engine falcon feather fern field flint "
    "forest fountain fox garnet geyser ginger glacier goblet granite grove hammock "
    "harbor hazel heather hollow horizon index iris island ivory jasper juniper kettle "
    "lagoon lantern larch ledge lilac linen lumen magnet mantle maple marble meadow "
    "mirror morning moss mountain nectar north oak ocean olive onyx orchard otter "
    "paddle parchment pebble pepper pine pistachio plume pond poplar prairie quarry "
    "quill rain raven reef ridge river rope rust saddle saffron sage sandal shore "
    "silver slate snow sparrow spruce stone summit thistle timber tulip twilight "
    "valley velvet walnut willow winter zephyr".split()
)


def suggest(seed: int, wordlist: Wordlist | None = None) -> Passphrase:
    """Two independent uniform draws. Deterministic for a given seed."""
    words = (wordlist or DEFAULT_WORDLIST).words
    rng = random.Random(seed)
    return Passphrase(f"{rng.choice(words)} {rng.choice(words)}")


# --- hash commitment variant --------------------------------------------------

@dataclass(frozen=True)
class Commitment:
    digest: str
    scheme_id: str = COMMIT_SCHEME_V1


def _commitment_material(scheme_id: str, referendum_id: str, vote: Vote, secret: bytes) -> bytes:
    parts = (scheme_id.encode("utf-8"), referendum_id.encode("utf-8"),
             vote.value.encode("utf-8"), secret)
    # length-prefixing keeps field boundaries unambiguous
    return b"".join(len(part).to_bytes(4, "big") + part for part in parts)


def _secret_bytes(secret: str | bytes) -> bytes:
    raw = secret.encode("utf-8") if isinstance(secret, str) else bytes(secret)
    if len(raw) < MIN_SECRET_BYTES:
        raise WeakSecret(f"commitment secret must be at least {MIN_SECRET_BYTES} bytes")
    return raw


def commit(secret: str | bytes, vote: Vote | str, referendum_id: str,
           scheme_id: str = COMMIT_SCHEME_V1) -> Commitment:
    """Digest binding (vote, referendum) to a private secret.

    In commitment mode the digest is submitted as the passphrase, so the
    published prompt reveals nothing about the tag until a dispute opens it.
    """
    if scheme_id != COMMIT_SCHEME_V1:
        raise UnknownScheme(f"unknown commitment scheme: {scheme_id!r}")
    material = _commitment_material(
        scheme_id, referendum_id, Vote.parse(vote), _secret_bytes(secret)
    )
    return Commitment(digest=hashlib.sha256(material).hexdigest(), scheme_id=scheme_id)


def verify_commitment(commitment: Commitment, secret: str | bytes, vote: Vote | str,
                      referendum_id: str) -> bool:
    if commitment.scheme_id != COMMIT_SCHEME_V1:
        raise UnknownScheme(f"unknown commitment scheme: {commitment.scheme_id!r}")
    try:
        expected = commit(secret, vote, referendum_id, commitment.scheme_id)
    except WeakSecret:
        return False
    return hmac.compare_digest(expected.digest, commitment.digest)
