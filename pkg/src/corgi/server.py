"""HTTP session API: the dialog engine over the wire.

A pure adapter: every endpoint delegates to the same engine calls the REPL
uses, so HTTP replays and direct replays produce identical action
sequences. One in-flight request per session is enforced (concurrent
answers are rejected, not queued). Finished sessions append to the store.
"""

from __future__ import annotations

import threading
from collections import Counter
from typing import Dict

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppConfig
from .dialog import (CLARIFY_TEMPLATE, DialogSession, NotAwaitingAnswer,
                     ParseFailure, start_session, user_answer)
from .errors import CorgiError
from .softprove import OracleGuide, SoftProveConfig
from .store import SessionRecord, persist_session

API_PREFIX = "/api/v1"


class CommandBody(BaseModel):
    command: str


class AnswerBody(BaseModel):
    text: str


class _SessionSlot:
    def __init__(self, session: DialogSession):
        self.session = session
        self.lock = threading.Lock()


def create_app(config: AppConfig, mode: str = "oracle",
               ui_dir: str = None) -> FastAPI:
    base_kb = config.load_kb()
    cfg = SoftProveConfig(k=config.k, t1=config.t1, t2=config.t2,
                          max_depth=config.max_depth,
                          max_steps=config.max_steps)
    if mode == "soft":
        from .model import ModelParams, NeuralGuide
        if not config.model_path:
            raise CorgiError("soft mode needs a model checkpoint")
        params = ModelParams.load(config.model_path,
                                  kb_fingerprint=base_kb.fingerprint())
        guide_factory = lambda kb: NeuralGuide(params, kb)
    else:
        guide_factory = lambda kb: OracleGuide()

    app = FastAPI(title="corgi", version="1")
    sessions: Dict[str, _SessionSlot] = {}
    store_lock = threading.Lock()

    def _slot(session_id: str) -> _SessionSlot:
        slot = sessions.get(session_id)
        if slot is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return slot

    def _maybe_persist(session: DialogSession) -> None:
        if session.status in ("succeeded", "failed"):
            record = SessionRecord(
                session_id=session.id, status=session.status,
                transcript=session.transcript,
                learned_rules=list(session.contributed_rules))
            with store_lock:
                persist_session(record, config.session_store_path)

    @app.post(API_PREFIX + "/sessions", status_code=201)
    def create(body: CommandBody):
        try:
            session, action = start_session(
                base_kb, body.command, guide_factory=guide_factory,
                cfg=cfg, n=config.n)
        except ParseFailure as exc:
            return JSONResponse(status_code=400, content={
                "error": str(exc), "clarification": CLARIFY_TEMPLATE})
        sessions[session.id] = _SessionSlot(session)
        _maybe_persist(session)
        return {"session_id": session.id, "status": session.status,
                "action": action.to_record()}

    @app.post(API_PREFIX + "/sessions/{session_id}/answers")
    def answer(session_id: str, body: AnswerBody):
        slot = _slot(session_id)
        if not slot.lock.acquire(blocking=False):
            raise HTTPException(status_code=409,
                                detail="another request is in flight")
        try:
            action = user_answer(slot.session, body.text)
        except NotAwaitingAnswer as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        finally:
            slot.lock.release()
        _maybe_persist(slot.session)
        return {"session_id": session_id, "status": slot.session.status,
                "action": action.to_record()}

    @app.get(API_PREFIX + "/sessions/{session_id}")
    def transcript(session_id: str):
        session = _slot(session_id).session
        return {"session_id": session_id, "status": session.status,
                "transcript": [[s, t] for s, t in session.transcript],
                "learned_rules": list(session.contributed_rules)}

    @app.get(API_PREFIX + "/sessions/{session_id}/proof")
    def proof(session_id: str):
        session = _slot(session_id).session
        if session.result is None:
            raise HTTPException(status_code=404, detail="no proof recorded")
        return {
            "session_id": session_id,
            "proof": session.result.proof.to_record(session.result.bindings),
            "presumptions": [p.to_record() for p in session.presumptions],
        }

    @app.get(API_PREFIX + "/kb/stats")
    def kb_stats():
        by_prov = Counter(c.provenance for c in base_kb.clauses)
        by_domain = Counter(c.domain for c in base_kb.clauses)
        return {"clauses": len(base_kb),
                "facts": sum(1 for c in base_kb.clauses if c.is_fact),
                "by_provenance": dict(by_prov),
                "by_domain": dict(by_domain),
                "fingerprint": base_kb.fingerprint()}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
