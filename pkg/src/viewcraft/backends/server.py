"""Minimal threaded HTTP server exposing a stub hub over the wire protocol.

Lets the HTTP transport, the service layer, and external callers exercise
the exact same handlers the in-process transport uses.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import ViewcraftError
from . import wire
from .stubs import StubHub


class StubBackendServer:
    """Serves a StubHub on localhost; port 0 picks a free port."""

    def __init__(self, hub: StubHub, host: str = "127.0.0.1", port: int = 0):
        self.hub = hub
        handler = _make_handler(hub)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StubBackendServer":
        self._thread = threading.Thread(target=self.httpd.serve_forever,
                                        name="stub-backend-server", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "StubBackendServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def _make_handler(hub: StubHub):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _send(self, status: int, payload: dict) -> None:
            body = wire.canonical_json(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("content-type", "application/json")
            self.send_header("content-length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == wire.HEALTH_PATH:
                self._send(200, {"status": "ok",
                                 "stubs": sorted(hub.handlers)})
            else:
                self._send(404, {"error": {"type": "ProtocolError",
                                           "detail": f"no route {self.path}"}})

        def do_POST(self):
            handler = hub.handler_for_path(self.path)
            if handler is None:
                self._send(404, {"error": {"type": "ProtocolError",
                                           "detail": f"no route {self.path}"}})
                return
            try:
                length = int(self.headers.get("content-length", 0))
                payload = json.loads(self.rfile.read(length).decode("utf-8"))
            except (ValueError, UnicodeDecodeError) as exc:
                self._send(400, {"error": {"type": "ProtocolError",
                                           "detail": f"unreadable body: {exc}"}})
                return
            try:
                self._send(200, handler.handle(payload))
            except ViewcraftError as exc:
                status, body = wire.encode_error(exc)
                self._send(status, body)
            except Exception as exc:  # noqa: BLE001 - stub must answer, not die
                self._send(500, {"error": {"type": "InternalError",
                                           "detail": repr(exc)}})

    return Handler
