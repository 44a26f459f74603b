"""HTTP surface over the voting service.

Design rule: the ballot endpoint authenticates with the one-time token alone.
There is no session on that route, so no request log or middleware can join a
ballot to a login. Everything else uses short-lived bearer sessions.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import Body, FastAPI, Header, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .errors import (
    AccessDenied,
    AlreadyIssued,
    AuthenticationFailed,
    DuplicateSubmission,
    PvvError,
    UnauthorizedActor,
    UnknownReferendum,
)
from .model import Vote
from .disputes import ClaimProof
from .service import Session, VotingService

_STATUS_FOR = {
    AuthenticationFailed: 401,
    UnauthorizedActor: 403,
    AccessDenied: 403,
    UnknownReferendum: 404,
    AlreadyIssued: 409,
    DuplicateSubmission: 409,
}


def _status_for(error: PvvError) -> int:
    for cls, status in _STATUS_FOR.items():
        if isinstance(error, cls):
            return status
    return 400


def create_app(service: VotingService, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="pvv", docs_url=None, redoc_url=None)

    @app.exception_handler(PvvError)
    async def pvv_error_handler(request: Request, error: PvvError):
        return JSONResponse(
            status_code=_status_for(error),
            content={"error": type(error).__name__, "detail": str(error)},
        )

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, error: ValueError):
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(error)},
        )

    def _session(authorization: str | None) -> Session:
        if not authorization or not authorization.startswith("Bearer "):
            raise AuthenticationFailed("missing bearer token")
        return service.session(authorization[len("Bearer "):])

    @app.post("/auth/session")
    def create_session(payload: dict = Body(...)):
        session = service.create_session(
            payload["principal"], payload.get("credential")
        )
        return {
            "token": session.token,
            "principal": session.principal,
            "expires_at": session.expires_at.isoformat(),
            "roles": sorted(r.value for r in service.roles_for(session.principal)),
        }

    @app.post("/referenda", status_code=201)
    def create_referendum(payload: dict = Body(...),
                          authorization: str | None = Header(default=None)):
        referendum = service.create_referendum(_session(authorization), payload)
        return {"referendum_id": referendum.referendum_id}

    @app.get("/referenda")
    def list_referenda():
        return {"referenda": service.referendum_ids()}

    @app.get("/referenda/{referendum_id}")
    def referendum_status(referendum_id: str):
        election = service.election(referendum_id)
        referendum = election.referendum
        return {
            "referendum_id": referendum.referendum_id,
            "question": referendum.question,
            "date": referendum.date.isoformat(),
            "phase": election.phase.value,
            "eligible_count": len(referendum.eligible_voters),
            "absentee_approved_count": len(referendum.absentee_approved),
            "prompt_published": election.current_prompt_text is not None,
        }

    @app.post("/referenda/{referendum_id}/phase")
    def advance_phase(referendum_id: str, payload: dict = Body(...),
                      authorization: str | None = Header(default=None)):
        phase = service.advance_phase(
            _session(authorization), referendum_id, payload["target"]
        )
        return {"phase": phase.value}

    @app.post("/referenda/{referendum_id}/token")
    def issue_token(referendum_id: str,
                    authorization: str | None = Header(default=None)):
        token = service.issue_token(_session(authorization), referendum_id)
        return {"token": token.value, "absentee": token.absentee}

    @app.post("/referenda/{referendum_id}/ballot", status_code=201)
    def cast_ballot(referendum_id: str, payload: dict = Body(...)):
        # deliberately sessionless, see module docstring
        report = service.cast_ballot(
            referendum_id,
            payload["token"],
            payload["passphrase"],
            Vote.parse(payload["vote"]),
        )
        return {"accepted": True, "warnings": [w.value for w in report.warnings]}

    @app.post("/referenda/{referendum_id}/absentee-ack")
    def absentee_ack(referendum_id: str,
                     authorization: str | None = Header(default=None)):
        service.record_absentee_ack(_session(authorization), referendum_id)
        return {"acknowledged": True}

    @app.get("/referenda/{referendum_id}/count")
    def count(referendum_id: str):
        body = {"ballots": service.live_count(referendum_id), "tally": None}
        try:
            body["tally"] = {v.value: n for v, n in service.tally(referendum_id).items()}
        except PvvError:
            pass
        return body

    @app.get("/referenda/{referendum_id}/prompt", response_class=PlainTextResponse)
    def get_prompt(referendum_id: str):
        return service.get_prompt(referendum_id)

    @app.post("/referenda/{referendum_id}/publish")
    def publish(referendum_id: str,
                authorization: str | None = Header(default=None)):
        text = service.publish_prompt(_session(authorization), referendum_id)
        return {"published": True, "length": len(text)}

    @app.post("/referenda/{referendum_id}/verification")
    def record_verification(referendum_id: str, payload: dict = Body(...),
                            authorization: str | None = Header(default=None)):
        service.record_verification(
            _session(authorization),
            referendum_id,
            attested=payload.get("attested", True),
            note=payload.get("note"),
        )
        return {"recorded": True}

    @app.get("/referenda/{referendum_id}/participation")
    def participation(referendum_id: str,
                      authorization: str | None = Header(default=None)):
        return service.participation(_session(authorization), referendum_id)

    @app.get("/referenda/{referendum_id}/bundle")
    def bundle(referendum_id: str):
        return service.get_bundle(referendum_id)

    @app.post("/referenda/{referendum_id}/dispute", status_code=201)
    def file_dispute(referendum_id: str, payload: dict = Body(...),
                     authorization: str | None = Header(default=None)):
        proof = None
        if payload.get("proof"):
            proof = ClaimProof(
                secret=payload["proof"]["secret"],
                vote=Vote.parse(payload["proof"]["vote"]),
            )
        claim = service.file_dispute(
            _session(authorization),
            referendum_id,
            payload["passphrase"],
            Vote.parse(payload["claimed_vote"]),
            proof=proof,
        )
        return {"claim_id": claim.claim_id}

    @app.get("/referenda/{referendum_id}/disputes")
    def dispute_queue(referendum_id: str,
                      authorization: str | None = Header(default=None)):
        return {"claims": service.dispute_queue(_session(authorization), referendum_id)}

    @app.post("/referenda/{referendum_id}/disputes/{claim_id}/adjudicate")
    def adjudicate(referendum_id: str, claim_id: str,
                   authorization: str | None = Header(default=None)):
        outcome = service.adjudicate_claim(
            _session(authorization), referendum_id, claim_id
        )
        return {
            "claim_id": outcome.claim_id,
            "classification": outcome.classification.value,
            "rationale": outcome.rationale,
        }

    @app.post("/referenda/{referendum_id}/disputes/{claim_id}/apply")
    def apply_correction(referendum_id: str, claim_id: str,
                         authorization: str | None = Header(default=None)):
        text = service.apply_correction(
            _session(authorization), referendum_id, claim_id
        )
        return {"applied": True, "length": len(text)}

    @app.get("/referenda/{referendum_id}/dispute-report")
    def dispute_report(referendum_id: str):
        return service.dispute_report(referendum_id)

    @app.get("/referenda/{referendum_id}/audit-log", response_class=PlainTextResponse)
    def audit_log(referendum_id: str):
        return service.audit_log_export(referendum_id)

    @app.get("/referenda/{referendum_id}/chain-check")
    def chain_check(referendum_id: str):
        result = service.verify_chain(referendum_id)
        return {
            "ok": result.ok,
            "first_invalid_index": result.first_invalid_index,
            "reason": result.reason,
        }

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
