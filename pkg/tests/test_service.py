import datetime as dt
import threading

import pytest

from pvv.errors import (
    AlreadyIssued,
    AuthenticationFailed,
    DuplicateSubmission,
    Ineligible,
    InvalidToken,
    NotYetAvailable,
    PhaseTooEarly,
    UnauthorizedActor,
)
from pvv.model import ElectionPhase, Vote
from pvv.service import RoleAssignment, VotingService
from pvv.store import AccessDenied, KeyValueStore, Namespace

UTC = dt.timezone.utc
T0 = dt.datetime(2026, 3, 2, 9, 0, tzinfo=UTC)

ROLES = RoleAssignment(
    ea=frozenset({"alice"}),
    chair="carol",
    t1="tom",
    t2="tina",
    panel=frozenset({"pat"}),
)

ROSTER = ["m1", "m2", "m3", "m4", "m5"]


class Clock:
    def __init__(self, start=T0):
        self.now = start

    def __call__(self):
        return self.now

    def tick(self, **kwargs):
        self.now += dt.timedelta(**kwargs)


def make_service(store=None, clock=None):
    return VotingService(
        store=store if store is not None else KeyValueStore(),
        roles=ROLES,
        clock=clock if clock is not None else Clock(),
    )


def make_referendum(service, rid="R-SVC", absentee=()):
    ea = service.create_session("alice")
    service.create_referendum(ea, {
        "referendum_id": rid,
        "question": "Adopt the proposal?",
        "date": "2026-03-02",
        "eligible_voters": ROSTER,
        "absentee_approved": list(absentee),
    })
    return ea


def cast(service, rid, voter, phrase, vote):
    token = service.issue_token(service.create_session(voter), rid)
    return service.cast_ballot(rid, token.value, phrase, vote)


class TestSessions:
    def test_unknown_principal_rejected(self):
        service = make_service()
        with pytest.raises(AuthenticationFailed):
            service.create_session("nobody")

    def test_roles_resolved_per_principal(self):
        service = make_service()
        make_referendum(service)
        assert {r.value for r in service.roles_for("alice")} == {"EA"}
        assert {r.value for r in service.roles_for("m1")} == {"Voter"}
        assert {r.value for r in service.roles_for("pat")} == {"Panel"}

    def test_sessions_expire(self):
        clock = Clock()
        service = make_service(clock=clock)
        make_referendum(service)
        session = service.create_session("m1")
        clock.tick(hours=9)
        with pytest.raises(AuthenticationFailed):
            service.session(session.token)


class TestRoleGates:
    def test_voter_cannot_create_referendum(self):
        service = make_service()
        make_referendum(service)
        voter = service.create_session("m1")
        with pytest.raises(UnauthorizedActor):
            service.create_referendum(voter, {
                "referendum_id": "R2", "date": "2026-03-02",
                "eligible_voters": ["m1"],
            })

    def test_chair_runs_meeting_but_not_reporting(self):
        service = make_service()
        ea = make_referendum(service)
        chair = service.create_session("carol")
        service.advance_phase(chair, "R-SVC", ElectionPhase.VOTING_OPEN)
        service.advance_phase(chair, "R-SVC", ElectionPhase.VOTING_CLOSED)
        service.publish_prompt(ea, "R-SVC")
        service.advance_phase(chair, "R-SVC", ElectionPhase.VERIFICATION_OPEN)
        service.advance_phase(chair, "R-SVC", ElectionPhase.VERIFICATION_CLOSED)
        with pytest.raises(UnauthorizedActor):
            service.advance_phase(chair, "R-SVC", ElectionPhase.REPORTED)

    def test_only_ea_publishes(self):
        service = make_service()
        make_referendum(service)
        chair = service.create_session("carol")
        service.advance_phase(chair, "R-SVC", ElectionPhase.VOTING_OPEN)
        service.advance_phase(chair, "R-SVC", ElectionPhase.VOTING_CLOSED)
        with pytest.raises(UnauthorizedActor):
            service.publish_prompt(chair, "R-SVC")

    def test_participation_not_for_voters(self):
        service = make_service()
        make_referendum(service)
        voter = service.create_session("m1")
        with pytest.raises(UnauthorizedActor):
            service.participation(voter, "R-SVC")

    def test_trustees_may_not_be_on_the_roster(self):
        service = make_service()
        ea = service.create_session("alice")
        with pytest.raises(ValueError):
            service.create_referendum(ea, {
                "referendum_id": "R-BAD", "date": "2026-03-02",
                "eligible_voters": ["m1", "tina"],
            })


class TestTokens:
    def test_one_token_per_voter(self):
        service = make_service()
        make_referendum(service)
        session = service.create_session("m1")
        service.issue_token(session, "R-SVC")
        with pytest.raises(AlreadyIssued):
            service.issue_token(session, "R-SVC")

    def test_only_roster_members(self):
        service = make_service()
        make_referendum(service)
        with pytest.raises(Ineligible):
            service.issue_token(service.create_session("tina"), "R-SVC")

    def test_token_records_carry_no_identity(self):
        service = make_service()
        make_referendum(service)
        service.issue_token(service.create_session("m1"), "R-SVC")
        for key, record in service.store.items(Namespace.REGISTRAR, "token/"):
            assert set(record) == {"referendum_id", "absentee", "consumed"}
            assert "m1" not in key and "m1" not in str(record)

    def test_issued_flags_carry_no_token_value(self):
        service = make_service()
        make_referendum(service)
        token = service.issue_token(service.create_session("m1"), "R-SVC")
        flag = service.store.get(Namespace.REGISTRAR, "issued/R-SVC/m1")
        assert flag is not None
        assert token.value not in str(flag)

    def test_concurrent_double_spend_admits_one_ballot(self):
        service = make_service()
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        token = service.issue_token(service.create_session("m1"), "R-SVC")
        outcomes = []

        def spend(vote):
            try:
                service.cast_ballot("R-SVC", token.value, "racing pair", vote)
                outcomes.append("ok")
            except DuplicateSubmission:
                outcomes.append("dup")

        threads = [threading.Thread(target=spend, args=(v,))
                   for v in (Vote.YES, Vote.NO, Vote.ABSTAIN, Vote.YES)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert outcomes.count("ok") == 1
        assert service.live_count("R-SVC") == 1


class TestBallotFlow:
    def test_cast_and_count(self):
        service = make_service()
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        report = cast(service, "R-SVC", "m1", "velvet anchor", Vote.YES)
        assert report.warnings == ()
        assert service.live_count("R-SVC") == 1

    def test_bad_token_rejected(self):
        service = make_service()
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        with pytest.raises(InvalidToken):
            service.cast_ballot("R-SVC", "ff" * 16, "velvet anchor", Vote.YES)

    def test_token_scoped_to_its_referendum(self):
        service = make_service()
        ea = make_referendum(service)
        service.create_referendum(ea, {
            "referendum_id": "R-OTHER", "date": "2026-03-02",
            "eligible_voters": ROSTER,
        })
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        service.advance_phase(ea, "R-OTHER", ElectionPhase.VOTING_OPEN)
        token = service.issue_token(service.create_session("m1"), "R-SVC")
        with pytest.raises(InvalidToken):
            service.cast_ballot("R-OTHER", token.value, "velvet anchor", Vote.YES)

    def test_absentee_issue_and_cast(self):
        clock = Clock(T0 - dt.timedelta(hours=5))
        service = make_service(clock=clock)
        ea = make_referendum(service, absentee=["m5"])
        service.advance_phase(ea, "R-SVC", ElectionPhase.ABSENTEE_OPEN)
        token = service.issue_token(service.create_session("m5"), "R-SVC")
        assert token.absentee is True
        service.cast_ballot("R-SVC", token.value, "remote cedar", Vote.YES)
        service.record_absentee_ack(service.create_session("m5"), "R-SVC")


def run_to_reported(service, ea, rid="R-SVC"):
    service.advance_phase(ea, rid, ElectionPhase.VOTING_OPEN)
    ballots = [
        ("m1", "quiet harbor", Vote.YES),
        ("m2", "solid brook", Vote.NO),
        ("m3", "amber ledge", Vote.YES),
    ]
    for voter, phrase, vote in ballots:
        cast(service, rid, voter, phrase, vote)
    service.advance_phase(ea, rid, ElectionPhase.VOTING_CLOSED)
    service.publish_prompt(ea, rid)
    service.advance_phase(ea, rid, ElectionPhase.VERIFICATION_OPEN)
    for voter, _, _ in ballots:
        service.record_verification(service.create_session(voter), rid)
    service.advance_phase(ea, rid, ElectionPhase.VERIFICATION_CLOSED)
    service.advance_phase(ea, rid, ElectionPhase.REPORTED)
    return ballots


class TestReporting:
    def test_bundle_published_at_reported(self):
        service = make_service()
        ea = make_referendum(service)
        run_to_reported(service, ea)
        bundle = service.get_bundle("R-SVC")
        assert bundle["revision"] == 0
        assert len(bundle["vote_table"]) == 3

    def test_bundle_absent_before_reported(self):
        service = make_service()
        make_referendum(service)
        with pytest.raises(NotYetAvailable):
            service.get_bundle("R-SVC")

    def test_final_bundle_includes_dispute_summary_and_seals(self):
        clock = Clock()
        service = make_service(clock=clock)
        ea = make_referendum(service)
        run_to_reported(service, ea)
        service.advance_phase(ea, "R-SVC", ElectionPhase.DISPUTE_WINDOW)
        service.file_dispute(service.create_session("m2"), "R-SVC", "solid brook", Vote.YES)
        service.adjudicate_claim(service.create_session("pat"), "R-SVC", "claim-1")
        service.apply_correction(ea, "R-SVC", "claim-1")
        clock.tick(hours=49)
        service.advance_phase(ea, "R-SVC", ElectionPhase.FINAL)
        bundle = service.get_bundle("R-SVC")
        assert bundle["revision"] == 1
        assert bundle["dispute_summary"]["claim_count"] == 1
        assert service.election("R-SVC").audit_log.sealed
        # corrected pair appears in the final bundle
        pairs = {(r["passphrase"], r["vote"]) for r in bundle["vote_table"]}
        assert ("solid brook", "YES") in pairs

    def test_dispute_report_waits_for_window(self):
        clock = Clock()
        service = make_service(clock=clock)
        ea = make_referendum(service)
        run_to_reported(service, ea)
        service.advance_phase(ea, "R-SVC", ElectionPhase.DISPUTE_WINDOW)
        with pytest.raises(PhaseTooEarly):
            service.dispute_report("R-SVC")
        clock.tick(hours=49)
        assert service.dispute_report("R-SVC")["claim_count"] == 0

    def test_sequential_claim_ids(self):
        service = make_service()
        ea = make_referendum(service)
        run_to_reported(service, ea)
        service.advance_phase(ea, "R-SVC", ElectionPhase.DISPUTE_WINDOW)
        c1 = service.file_dispute(service.create_session("m1"), "R-SVC", "quiet harbor", Vote.NO)
        c2 = service.file_dispute(service.create_session("m2"), "R-SVC", "solid brook", Vote.YES)
        assert (c1.claim_id, c2.claim_id) == ("claim-1", "claim-2")

    def test_dispute_queue_is_anonymized(self):
        service = make_service()
        ea = make_referendum(service)
        run_to_reported(service, ea)
        service.advance_phase(ea, "R-SVC", ElectionPhase.DISPUTE_WINDOW)
        service.file_dispute(service.create_session("m2"), "R-SVC", "solid brook", Vote.YES)
        queue = service.dispute_queue(service.create_session("pat"), "R-SVC")
        assert len(queue) == 1
        assert "voter_id" not in queue[0]
        assert "m2" not in str(queue)


class TestNotifications:
    def test_verification_request_is_identical_for_everyone(self):
        service = make_service()
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        cast(service, "R-SVC", "m1", "quiet harbor", Vote.YES)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_CLOSED)
        service.publish_prompt(ea, "R-SVC")
        messages = [m for m in service.notifier.messages
                    if m.subject.startswith("Verification request")]
        assert {m.recipient for m in messages} == set(ROSTER) | {"tina"}
        assert len({m.body for m in messages}) == 1  # byte-identical bodies
        assert len({m.subject for m in messages}) == 1

    def test_prompt_embedded_when_configured(self):
        service = make_service()
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        cast(service, "R-SVC", "m1", "quiet harbor", Vote.YES)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_CLOSED)
        text = service.publish_prompt(ea, "R-SVC")
        message = next(m for m in service.notifier.messages
                       if m.subject.startswith("Verification request"))
        assert text in message.body

    def test_report_broadcast_carries_bundle_hash(self):
        service = make_service()
        ea = make_referendum(service)
        run_to_reported(service, ea)
        reports = [m for m in service.notifier.messages
                   if m.subject.startswith("Referendum report")]
        assert reports and all("Bundle hash: " in m.body for m in reports)


class TestPersistence:
    def test_reload_from_store_mid_election(self):
        store = KeyValueStore()
        service = make_service(store=store)
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        cast(service, "R-SVC", "m1", "quiet harbor", Vote.YES)

        # a second service over the same store sees the same world
        reloaded = VotingService(store=store, clock=Clock())
        assert reloaded.referendum_ids() == ["R-SVC"]
        assert reloaded.live_count("R-SVC") == 1
        assert reloaded.election("R-SVC").audit_log.verify().ok
        assert reloaded.roles == ROLES

    def test_reload_supports_continuing_the_flow(self):
        store = KeyValueStore()
        service = make_service(store=store)
        ea = make_referendum(service)
        service.advance_phase(ea, "R-SVC", ElectionPhase.VOTING_OPEN)
        token = service.issue_token(service.create_session("m1"), "R-SVC")

        reloaded = VotingService(store=store, clock=Clock())
        reloaded.cast_ballot("R-SVC", token.value, "quiet harbor", Vote.YES)
        with pytest.raises(DuplicateSubmission):
            reloaded.cast_ballot("R-SVC", token.value, "quiet harbor", Vote.NO)

    def test_file_backed_store_roundtrip(self, tmp_path):
        path = tmp_path / "store.json"
        service = make_service(store=KeyValueStore(path))
        ea = make_referendum(service)
        run_to_reported(service, ea)
        reloaded = VotingService(store=KeyValueStore(path), clock=Clock())
        assert reloaded.get_bundle("R-SVC")["revision"] == 0
        assert reloaded.verify_chain("R-SVC").ok


class TestStoreAccess:
    def test_voters_read_nothing(self):
        store = KeyValueStore()
        from pvv.model import Role
        with pytest.raises(AccessDenied):
            store.scan(Namespace.REGISTRAR, role=Role.VOTER)

    def test_chair_cannot_read_registrar(self):
        store = KeyValueStore()
        from pvv.model import Role
        with pytest.raises(AccessDenied):
            store.scan(Namespace.REGISTRAR, role=Role.CHAIR)

    def test_panel_reads_claims(self):
        store = KeyValueStore()
        from pvv.model import Role
        assert store.scan(Namespace.CLAIMS, role=Role.PANEL) == []

    def test_ea_cannot_read_claims(self):
        store = KeyValueStore()
        from pvv.model import Role
        with pytest.raises(AccessDenied):
            store.scan(Namespace.CLAIMS, role=Role.EA)
