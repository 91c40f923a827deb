"""HTTP and WebSocket surface over the gateway.

Endpoints::

    POST /api/sessions                 scenario document -> {"session": id}
    GET  /api/sessions/{id}/state      full session state document
    POST /api/sessions/{id}/commands   {"action": ...} -> {"result", "events"}
    GET  /api/sessions/{id}/trace      event stream as JSON lines (text)
    WS   /api/sessions/{id}/events     history then live event lines

The WebSocket carries exactly the same JSON lines as the exported trace, so
a client that reconstructs its view from the socket sees nothing the trace
does not contain.
"""

from __future__ import annotations

import asyncio
from pathlib import Path

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .gateway import CommandError, Gateway, SessionNotFound, canonical_line
from .world import ScenarioError


def create_app(gateway: Gateway | None = None, console_dir: str | None = None) -> FastAPI:
    """Build the app; ``console_dir`` mounts a built web console at /console."""
    gw = gateway if gateway is not None else Gateway()
    app = FastAPI(title="uatmsim gateway")
    app.state.gateway = gw

    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        if not Path(console_dir).is_dir():
            raise ValueError(f"console directory not found: {console_dir}")
        app.mount("/console", StaticFiles(directory=console_dir, html=True))

    @app.post("/api/sessions", status_code=201)
    def create_session(document: dict):
        try:
            session = gw.create_session(document)
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {
            "session": session.session_id,
            "in_flight": len(session.state.agent_states),
        }

    @app.get("/api/sessions/{session_id}/state")
    def get_state(session_id: str):
        try:
            return gw.state_doc(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/api/sessions/{session_id}/commands")
    def post_command(session_id: str, action: dict):
        try:
            session = gw.get(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        before = len(session.events)
        try:
            result = gw.command(session_id, action)
        except CommandError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "result": result,
            "events": [canonical_line(e) for e in session.events[before:]],
        }

    @app.get("/api/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        try:
            session = gw.get(session_id)
        except SessionNotFound as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return PlainTextResponse(session.export_trace())

    @app.websocket("/api/sessions/{session_id}/events")
    async def events(websocket: WebSocket, session_id: str):
        await websocket.accept()
        try:
            session = gw.get(session_id)
        except SessionNotFound:
            await websocket.close(code=4404)
            return
        sent = 0
        try:
            while True:
                lines = session.event_lines()
                while sent < len(lines):
                    await websocket.send_text(lines[sent])
                    sent += 1
                await asyncio.sleep(0.02)
        except WebSocketDisconnect:
            return

    return app
