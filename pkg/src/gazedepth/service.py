"""WebSocket service hosting one playground session per connection.

Transport framing: every protocol message is one JSON object serialized on
a single newline-terminated line; over WebSocket each line travels as one
text frame.  The tick loop runs on the simulated clock paced to wall time;
incoming control messages are queued and applied between ticks.
"""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse

from .session import SessionConfig, SessionEngine

INDEX_FALLBACK = """<!doctype html>
<html><head><title>gazedepth session service</title></head>
<body>
<h1>gazedepth session service</h1>
<p>WebSocket endpoint: <code>/session</code> (one session per connection).</p>
<p>No playground UI is mounted. Build <code>frontend/</code> and serve with
<code>gazedepth serve --static-dir frontend/dist</code>, or open the built
frontend directly and point it at this host/port.</p>
</body></html>
"""


def _encode(message: dict) -> str:
    return json.dumps(message) + "\n"


async def _session_loop(ws: WebSocket, config: SessionConfig) -> None:
    engine = SessionEngine(config)
    inbox: asyncio.Queue[str] = asyncio.Queue()

    async def reader() -> None:
        while True:
            text = await ws.receive_text()
            await inbox.put(text)

    reader_task = asyncio.create_task(reader())
    period = 1.0 / config.sample_rate
    loop = asyncio.get_running_loop()
    next_tick = loop.time()
    try:
        while True:
            while not inbox.empty():
                line = inbox.get_nowait()
                for raw in line.splitlines():
                    if not raw.strip():
                        continue
                    try:
                        message = json.loads(raw)
                    except json.JSONDecodeError as exc:
                        replies = [engine._error("bad_message", f"invalid JSON: {exc.msg}")]
                    else:
                        replies = engine.apply(message)
                    for reply in replies:
                        await ws.send_text(_encode(reply))
            for message in engine.tick():
                await ws.send_text(_encode(message))
            next_tick += period
            delay = next_tick - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                # fell behind (slow client or heavy load): resynchronize
                next_tick = loop.time()
                await asyncio.sleep(0)
    finally:
        reader_task.cancel()


def create_app(config: SessionConfig = SessionConfig(), static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="gazedepth session service")

    @app.websocket("/session")
    async def session(ws: WebSocket) -> None:
        await ws.accept()
        try:
            await _session_loop(ws, config)
        except (WebSocketDisconnect, RuntimeError):
            return  # client gone; per-connection state is discarded

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="playground")
    else:
        @app.get("/")
        async def index() -> HTMLResponse:
            return HTMLResponse(INDEX_FALLBACK)

    return app


def serve_session(
    port: int,
    config: SessionConfig = SessionConfig(),
    host: str = "127.0.0.1",
    static_dir: Optional[str] = None,
) -> None:
    """Run the service until terminated (blocking)."""
    import uvicorn

    uvicorn.run(create_app(config, static_dir=static_dir), host=host, port=port, log_level="warning")
