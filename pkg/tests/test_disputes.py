import datetime as dt

import pytest

from pvv.disputes import (
    Classification,
    ClaimProof,
    DisputeClaim,
    adjudicate,
    apply_correction,
    dispute_report,
    dispute_window_end,
    file_claim,
)
from pvv.errors import (
    IneligibleClaimant,
    NotCorrectable,
    WindowClosed,
)
from pvv.model import (
    Election,
    ElectionPhase,
    Passphrase,
    Referendum,
    Role,
    TokenState,
    Vote,
)
from pvv.phrases import commit
from pvv.prompt import build_prompt, parse_prompt, render_prompt

UTC = dt.timezone.utc
REPORT_TIME = dt.datetime(2026, 3, 2, 18, 0, tzinfo=UTC)


def prompt_for(pairs):
    return build_prompt(pairs, referendum_id="R-DISPUTE")


def make_claim(passphrase, claimed_vote, proof=None):
    return DisputeClaim(
        claim_id="claim-1",
        voter_id="m1",
        passphrase=Passphrase(passphrase),
        claimed_vote=claimed_vote,
        filed_at=REPORT_TIME,
        proof=proof,
    )


class TestClassification:
    """The three-way split drives everything downstream."""

    def test_flipped_vote_is_correctable(self):
        prompt = prompt_for([("frank 99", Vote.NO), ("other pair", Vote.YES)])
        outcome = adjudicate(make_claim("frank 99", Vote.YES), prompt)
        assert outcome.classification is Classification.VALID_CORRECTABLE
        assert outcome.correction is not None
        assert outcome.correction.old_vote is Vote.NO
        assert outcome.correction.new_vote is Vote.YES

    def test_matching_pair_means_no_discrepancy(self):
        prompt = prompt_for([("frank 99", Vote.NO)])
        outcome = adjudicate(make_claim("frank 99", Vote.NO), prompt)
        assert outcome.classification is Classification.INVALID
        assert outcome.correction is None

    def test_missing_pair_cannot_be_resolved(self):
        prompt = prompt_for([("other pair", Vote.YES)])
        outcome = adjudicate(make_claim("frank 99", Vote.YES), prompt)
        assert outcome.classification is Classification.UNRESOLVABLE_DISCREDITATION

    def test_match_anywhere_beats_mismatch(self):
        # same phrase listed under both claimed and another vote: the claimed
        # copy satisfies the voter, so there is nothing to correct
        prompt = prompt_for([("same words", Vote.YES), ("same words", Vote.NO)])
        outcome = adjudicate(make_claim("same words", Vote.YES), prompt)
        assert outcome.classification is Classification.INVALID

    def test_two_mismatching_copies_unresolvable(self):
        # the phrase appears twice, neither matching the claim; no way to know
        # which entry is the claimant's
        prompt = prompt_for([("same words", Vote.NO), ("same words", Vote.ABSTAIN)])
        outcome = adjudicate(make_claim("same words", Vote.YES), prompt)
        assert outcome.classification is Classification.UNRESOLVABLE_DISCREDITATION

    def test_matching_is_canonical(self):
        prompt = prompt_for([("frank 99", Vote.NO)])
        outcome = adjudicate(make_claim("  FRANK  99 ", Vote.YES), prompt)
        assert outcome.classification is Classification.VALID_CORRECTABLE


class TestProof:
    def opening(self, vote):
        secret = "0123456789abcdef"
        digest = commit(secret, vote, "R-DISPUTE").digest
        return secret, digest

    def test_valid_opening_marks_outcome_proven(self):
        secret, digest = self.opening(Vote.YES)
        prompt = prompt_for([(digest, Vote.NO)])
        claim = make_claim(digest, Vote.YES, proof=ClaimProof(secret=secret, vote=Vote.YES))
        outcome = adjudicate(claim, prompt)
        assert outcome.classification is Classification.VALID_CORRECTABLE
        assert outcome.proven is True
        assert "commitment opening" in outcome.rationale

    def test_bad_opening_does_not_upgrade(self):
        secret, digest = self.opening(Vote.YES)
        prompt = prompt_for([(digest, Vote.NO)])
        claim = make_claim(digest, Vote.YES, proof=ClaimProof(secret="0000000000000000", vote=Vote.YES))
        outcome = adjudicate(claim, prompt)
        assert outcome.classification is Classification.VALID_CORRECTABLE
        assert outcome.proven is False

    def test_proof_must_open_to_the_claimed_vote(self):
        secret, digest = self.opening(Vote.NO)
        prompt = prompt_for([(digest, Vote.NO)])
        # claimant says YES but the commitment opens to NO
        claim = make_claim(digest, Vote.YES, proof=ClaimProof(secret=secret, vote=Vote.NO))
        outcome = adjudicate(claim, prompt)
        assert outcome.proven is False


def election_in_window(now=REPORT_TIME):
    referendum = Referendum(
        referendum_id="R-DISPUTE",
        question="Adopt?",
        date=dt.date(2026, 3, 2),
        eligible_voters=frozenset({"m1", "m2", "m3"}),
    )
    election = Election(referendum)
    election.advance_phase(ElectionPhase.VOTING_OPEN, Role.EA)
    table = [("frank 99", Vote.NO), ("quiet harbor", Vote.YES), ("solid brook", Vote.YES)]
    for i, (phrase, vote) in enumerate(table):
        token = TokenState(value=f"{i:032x}", referendum_id="R-DISPUTE")
        election.cast_ballot(token, Passphrase(phrase), vote)
    election.advance_phase(ElectionPhase.VOTING_CLOSED, Role.EA)
    election.publish_prompt(render_prompt(build_prompt(election.vote_table)))
    election.advance_phase(ElectionPhase.VERIFICATION_OPEN, Role.EA)
    election.advance_phase(ElectionPhase.VERIFICATION_CLOSED, Role.EA)
    election.advance_phase(ElectionPhase.REPORTED, Role.EA, now=now)
    election.advance_phase(ElectionPhase.DISPUTE_WINDOW, Role.EA, now=now)
    return election


class TestFiling:
    def test_window_end_is_48h_after_reporting(self):
        election = election_in_window()
        assert dispute_window_end(election) == REPORT_TIME + dt.timedelta(hours=48)

    def test_claim_inside_window(self):
        election = election_in_window()
        claim = file_claim(
            election, voter_id="m1", passphrase="frank 99",
            claimed_vote=Vote.YES, now=REPORT_TIME + dt.timedelta(hours=1),
        )
        assert claim.claimed_vote is Vote.YES

    def test_claim_after_window_rejected(self):
        election = election_in_window()
        with pytest.raises(WindowClosed):
            file_claim(
                election, voter_id="m1", passphrase="frank 99",
                claimed_vote=Vote.YES, now=REPORT_TIME + dt.timedelta(hours=49),
            )

    def test_claim_outside_phase_rejected(self):
        referendum = Referendum(
            referendum_id="R-DISPUTE",
            question="?",
            date=dt.date(2026, 3, 2),
            eligible_voters=frozenset({"m1"}),
        )
        with pytest.raises(WindowClosed):
            file_claim(
                Election(referendum), voter_id="m1", passphrase="frank 99",
                claimed_vote=Vote.YES, now=REPORT_TIME,
            )

    def test_non_member_cannot_file(self):
        election = election_in_window()
        with pytest.raises(IneligibleClaimant):
            file_claim(
                election, voter_id="stranger", passphrase="frank 99",
                claimed_vote=Vote.YES, now=REPORT_TIME,
            )

    def test_filed_event_omits_claimant_identity(self):
        election = election_in_window()
        file_claim(
            election, voter_id="m1", passphrase="frank 99",
            claimed_vote=Vote.YES, now=REPORT_TIME + dt.timedelta(hours=1),
        )
        event = election.audit_log.events[-1]
        assert event.kind == "DisputeFiled"
        payload = event.payload_dict()
        assert "m1" not in event.payload
        assert payload["passphrase"] == "frank 99"
        assert payload["claimed_vote"] == "YES"


class TestCorrection:
    def file_and_adjudicate(self, election):
        claim = file_claim(
            election, voter_id="m1", passphrase="frank 99",
            claimed_vote=Vote.YES, now=REPORT_TIME + dt.timedelta(hours=1),
        )
        prompt = parse_prompt(election.current_prompt_text)
        return adjudicate(claim, prompt)

    def test_correction_updates_table_and_prompt(self):
        election = election_in_window()
        outcome = self.file_and_adjudicate(election)
        corrected, event = apply_correction(election, outcome)
        assert corrected.tally == {Vote.YES: 3, Vote.NO: 0, Vote.ABSTAIN: 0}
        assert election.current_prompt_text == render_prompt(corrected)
        assert event.kind == "CorrectionApplied"

    def test_correction_event_names_pair_not_voter(self):
        election = election_in_window()
        outcome = self.file_and_adjudicate(election)
        _, event = apply_correction(election, outcome)
        payload = event.payload_dict()
        assert "m1" not in event.payload
        assert payload["from"] == "NO" and payload["to"] == "YES"

    def test_tally_after_correction_matches_rebuild(self):
        election = election_in_window()
        outcome = self.file_and_adjudicate(election)
        corrected, _ = apply_correction(election, outcome)
        rebuilt = build_prompt(election.vote_table)
        assert render_prompt(rebuilt) == render_prompt(corrected)

    def test_invalid_outcome_cannot_be_applied(self):
        election = election_in_window()
        claim = file_claim(
            election, voter_id="m1", passphrase="quiet harbor",
            claimed_vote=Vote.YES, now=REPORT_TIME + dt.timedelta(hours=1),
        )
        outcome = adjudicate(claim, parse_prompt(election.current_prompt_text))
        assert outcome.classification is Classification.INVALID
        with pytest.raises(NotCorrectable):
            apply_correction(election, outcome)

    def test_second_application_fails_cleanly(self):
        # once applied, the pair no longer carries the old vote
        election = election_in_window()
        outcome = self.file_and_adjudicate(election)
        apply_correction(election, outcome)
        with pytest.raises(NotCorrectable):
            apply_correction(election, outcome)


class TestReport:
    def test_rows_and_resolution(self):
        election = election_in_window()
        now = REPORT_TIME + dt.timedelta(hours=1)
        c1 = file_claim(election, voter_id="m1", passphrase="frank 99",
                        claimed_vote=Vote.YES, now=now, claim_id="claim-1")
        c2 = file_claim(election, voter_id="m2", passphrase="quiet harbor",
                        claimed_vote=Vote.YES, now=now, claim_id="claim-2")
        c3 = file_claim(election, voter_id="m3", passphrase="never cast",
                        claimed_vote=Vote.NO, now=now, claim_id="claim-3")
        prompt = parse_prompt(election.current_prompt_text)
        outcomes = {c.claim_id: adjudicate(c, prompt) for c in (c1, c2, c3)}
        report = dispute_report("R-DISPUTE", [c1, c2, c3], outcomes)
        assert report.claim_count == 3
        by_id = {row["claim_id"]: row for row in report.claims}
        assert by_id["claim-1"]["classification"] == "ValidCorrectable"
        assert by_id["claim-1"]["resolved"] is True
        assert by_id["claim-2"]["classification"] == "Invalid"
        assert by_id["claim-2"]["resolved"] is True
        assert by_id["claim-3"]["classification"] == "UnresolvableDiscreditation"
        assert by_id["claim-3"]["resolved"] is False

    def test_report_never_names_claimants(self):
        election = election_in_window()
        claim = file_claim(election, voter_id="m1", passphrase="frank 99",
                           claimed_vote=Vote.YES,
                           now=REPORT_TIME + dt.timedelta(hours=1))
        report = dispute_report("R-DISPUTE", [claim], {})
        assert "m1" not in report.to_json()

    def test_pending_claims_marked(self):
        election = election_in_window()
        claim = file_claim(election, voter_id="m1", passphrase="frank 99",
                           claimed_vote=Vote.YES,
                           now=REPORT_TIME + dt.timedelta(hours=1))
        report = dispute_report("R-DISPUTE", [claim], {})
        assert report.claims[0]["classification"] == "pending"
