import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from pvv.errors import EmptyPassphrase, InvalidModel, UnknownScheme, WeakSecret
from pvv.model import Vote
from pvv.phrases import (
    DEFAULT_WORDLIST,
    MIN_SECRET_BYTES,
    PhraseWarning,
    Wordlist,
    collision_probability,
    commit,
    detect_collisions,
    suggest,
    validate,
    verify_commitment,
)


class TestValidation:
    """Warnings advise, they never block; only empty input raises."""

    def test_clean_phrase(self):
        assert validate("velvet anchor").warnings == ()

    def test_punctuation_breaks_two_word_shape(self):
        report = validate("friendly, root")
        assert PhraseWarning.NOT_TWO_WORDS in report.warnings

    def test_single_word(self):
        assert PhraseWarning.NOT_TWO_WORDS in validate("velvet").warnings

    def test_three_words(self):
        assert PhraseWarning.NOT_TWO_WORDS in validate("one two three").warnings

    def test_short_tokens_flag_low_entropy(self):
        report = validate("k b")
        assert PhraseWarning.LOW_ENTROPY in report.warnings

    def test_short_alpha_tokens_look_like_initials(self):
        assert PhraseWarning.POSSIBLE_INITIALS in validate("jd bk").warnings

    def test_denylist_pair(self):
        assert PhraseWarning.LOW_ENTROPY in validate("abc def").warnings

    def test_reuse_detected_across_normalization(self):
        report = validate("Velvet  ANCHOR", previously_used=["velvet anchor"])
        assert PhraseWarning.REUSED_PHRASE in report.warnings

    def test_fresh_phrase_not_flagged_as_reused(self):
        report = validate("velvet anchor", previously_used=["other words"])
        assert PhraseWarning.REUSED_PHRASE not in report.warnings

    def test_empty_still_raises(self):
        with pytest.raises(EmptyPassphrase):
            validate("   ")

    def test_digits_do_not_trip_initials(self):
        report = validate("frank 99")
        assert PhraseWarning.POSSIBLE_INITIALS not in report.warnings
        assert PhraseWarning.LOW_ENTROPY in report.warnings  # "99" is 2 chars


class TestCollisionsInTable:
    def test_no_collisions_on_distinct_phrases(self):
        table = [("velvet anchor", Vote.YES), ("solid brook", Vote.NO)]
        assert detect_collisions(table) == []

    def test_collision_groups_report_votes(self):
        table = [
            ("same words", Vote.YES),
            ("Same  WORDS", Vote.NO),
            ("other pair", Vote.YES),
        ]
        groups = detect_collisions(table)
        assert len(groups) == 1
        assert groups[0].normalized == "same words"
        assert groups[0].count == 2
        assert groups[0].votes == (Vote.YES, Vote.NO)


class TestCollisionProbability:
    def test_zero_and_one_voter(self):
        assert collision_probability(0, 7776) == 0.0
        assert collision_probability(1, 7776) == 0.0

    def test_two_voters_tiny_wordlist(self):
        # two words from a 2-word list: 4 phrases, so p = 1/4
        assert collision_probability(2, 2) == pytest.approx(0.25)

    def test_more_voters_than_phrases_is_certain(self):
        assert collision_probability(5, 2) == 1.0

    def test_reference_point(self):
        p = collision_probability(26, 7776)
        assert p == pytest.approx(5.374892109364349e-06, rel=1e-12)

    def test_monotonic_in_voters(self):
        values = [collision_probability(n, 100) for n in range(0, 60)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_monotonic_in_wordlist(self):
        values = [collision_probability(20, w) for w in (10, 30, 100, 1000)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_matches_direct_product_formula(self):
        # same quantity without the log-space trick, at sizes where the naive
        # product is numerically safe
        for n, w in [(5, 10), (12, 50), (26, 7776)]:
            d = w * w
            naive = 1.0 - math.prod(1.0 - k / d for k in range(1, n))
            assert collision_probability(n, w) == pytest.approx(naive, rel=1e-9)

    def test_invalid_model_rejected(self):
        with pytest.raises(InvalidModel):
            collision_probability(-1, 10)
        with pytest.raises(InvalidModel):
            collision_probability(5, 0)


class TestWordlist:
    def test_needs_two_distinct_single_words(self):
        with pytest.raises(ValueError):
            Wordlist(("alpha",))
        with pytest.raises(ValueError):
            Wordlist(("alpha", "alpha"))
        with pytest.raises(ValueError):
            Wordlist(("two words", "alpha"))

    def test_lowercase_enforced(self):
        with pytest.raises(ValueError):
            Wordlist(("Alpha", "bravo"))

    def test_load_skips_comments(self, tmp_path):
        path = tmp_path / "words.txt"
        path.write_text("# preamble\nalpha\nbravo # trailing\n\ncharlie\n")
        wl = Wordlist.load(path)
        assert wl.words == ("alpha", "bravo", "charlie")

    def test_default_list_is_usable(self):
        assert len(DEFAULT_WORDLIST.words) >= 100
        assert all(w == w.casefold() for w in DEFAULT_WORDLIST.words)


class TestSuggest:
    def test_deterministic_per_seed(self):
        assert suggest(42).raw == suggest(42).raw
        assert suggest(42).raw != suggest(43).raw

    def test_two_words_from_the_list(self):
        for seed in range(20):
            words = suggest(seed).raw.split(" ")
            assert len(words) == 2
            assert all(w in DEFAULT_WORDLIST.words for w in words)

    def test_custom_wordlist(self):
        wl = Wordlist(("alpha", "bravo"))
        assert suggest(7, wl).raw == "bravo alpha"

    def test_suggestions_validate_cleanly(self):
        for seed in range(50):
            phrase = suggest(seed)
            report = validate(phrase.raw)
            assert PhraseWarning.NOT_TWO_WORDS not in report.warnings


class TestCommitments:
    REFERENDUM = "SMITH-OVERALL"

    def test_golden_digest(self):
        c = commit("0123456789abcdef", Vote.YES, self.REFERENDUM)
        assert c.scheme_id == "pvv-commit-v1"
        assert c.digest == (
            "01dd392bfb7642689f659631b546c14c7efc5595c5cb8d79c7da291f08fceb0b"
        )

    def test_verify_roundtrip(self):
        c = commit("0123456789abcdef", Vote.YES, self.REFERENDUM)
        assert verify_commitment(c, "0123456789abcdef", Vote.YES, self.REFERENDUM)

    def test_wrong_vote_fails(self):
        c = commit("0123456789abcdef", Vote.YES, self.REFERENDUM)
        assert not verify_commitment(c, "0123456789abcdef", Vote.NO, self.REFERENDUM)

    def test_wrong_referendum_fails(self):
        c = commit("0123456789abcdef", Vote.YES, self.REFERENDUM)
        assert not verify_commitment(c, "0123456789abcdef", Vote.YES, "OTHER")

    def test_short_secret_rejected(self):
        with pytest.raises(WeakSecret):
            commit("tiny", Vote.YES, self.REFERENDUM)

    def test_boundary_secret_length(self):
        secret = "x" * MIN_SECRET_BYTES
        assert verify_commitment(
            commit(secret, Vote.NO, self.REFERENDUM), secret, Vote.NO, self.REFERENDUM
        )

    def test_multibyte_secret_counts_bytes_not_chars(self):
        # 8 two-byte characters pass the 16 byte floor
        secret = "é" * 8
        commit(secret, Vote.YES, self.REFERENDUM)
        with pytest.raises(WeakSecret):
            commit("é" * 7, Vote.YES, self.REFERENDUM)

    def test_unknown_scheme_rejected(self):
        with pytest.raises(UnknownScheme):
            commit("0123456789abcdef", Vote.YES, self.REFERENDUM, scheme_id="nope-v9")

    def test_field_boundaries_are_unambiguous(self):
        # length prefixes keep (ab, c) distinct from (a, bc)
        a = commit("0123456789abcdef", Vote.YES, "AB")
        b = commit("0123456789abcdef", Vote.YES, "A")
        assert a.digest != b.digest

    @settings(max_examples=200)
    @given(
        secret=st.text(min_size=16, max_size=40),
        vote=st.sampled_from(list(Vote)),
        other_vote=st.sampled_from(list(Vote)),
    )
    def test_binding_property(self, secret, vote, other_vote):
        if len(secret.encode("utf-8")) < MIN_SECRET_BYTES:
            return
        c = commit(secret, vote, "PROP")
        assert verify_commitment(c, secret, vote, "PROP")
        if other_vote is not vote:
            assert not verify_commitment(c, secret, other_vote, "PROP")


class TestMonteCarloAgreement:
    """A small sanity-size MC run should land near the exact curve."""

    def test_small_case_agrees(self):
        # n=10, W=12 (D=144): exact p is large enough for a quick check
        exact = collision_probability(10, 12)
        rng = random.Random(5)
        trials = 20_000
        hits = 0
        for _ in range(trials):
            draws = [rng.randrange(144) for _ in range(10)]
            if len(set(draws)) < 10:
                hits += 1
        assert hits / trials == pytest.approx(exact, rel=0.05)
