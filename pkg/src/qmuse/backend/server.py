"""Threaded TCP circuit server: one JSON request per line, one response per line."""
from __future__ import annotations

import logging
import socketserver
import threading

from .local import LocalBackend
from .protocol import (MAX_LINE, CircuitRequest, CircuitResponse, ProtocolError,
                       decode_request, encode)

log = logging.getLogger(__name__)


class _Session:
    def __init__(self, seed):
        self.seed = seed
        self.backend = LocalBackend(seed=seed)
        self.lock = threading.Lock()


class SessionTable:
    """Per-session random streams. A new seed for an existing token restarts its stream."""

    def __init__(self, ignore_seeds: bool = False):
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()
        self.ignore_seeds = ignore_seeds

    def get(self, token: str, seed) -> _Session:
        if self.ignore_seeds:
            seed = None
        with self._lock:
            s = self._sessions.get(token)
            if s is None or (seed is not None and seed != s.seed):
                s = _Session(seed)
                self._sessions[token] = s
            return s

    def __len__(self):
        with self._lock:
            return len(self._sessions)


def execute(request: CircuitRequest, sessions: SessionTable) -> CircuitResponse:
    if request.kind == "health":
        return CircuitResponse("ok", "health", request.session)
    session = sessions.get(request.session, request.seed)
    with session.lock:
        if request.kind == "hyperdie":
            records = session.backend.hyperdie(request.shots)
        else:
            records = session.backend.transition(request.angles, request.armed_bits, request.shots)
    return CircuitResponse("ok", request.kind, request.session, tuple(records))


def handle_line(line: bytes, sessions: SessionTable) -> CircuitResponse:
    """Never raises: every failure becomes an error response."""
    try:
        request = decode_request(line)
    except ProtocolError as exc:
        return CircuitResponse("error", error_message=str(exc))
    except Exception as exc:  # noqa: BLE001
        return CircuitResponse("error", error_message=f"bad request: {exc!r}")
    try:
        return execute(request, sessions)
    except Exception as exc:  # noqa: BLE001
        log.exception("request failed")
        return CircuitResponse("error", request.kind, request.session,
                               error_message=f"execution failed: {exc}")


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        while True:
            try:
                line = self.rfile.readline(MAX_LINE + 1)
            except (ConnectionError, OSError):
                return
            if not line:
                return
            if len(line) > MAX_LINE and not line.endswith(b"\n"):
                # drain the rest of the oversized line
                while line and not line.endswith(b"\n"):
                    line = self.rfile.readline(MAX_LINE + 1)
                response = CircuitResponse("error", error_message="request line too long")
            elif not line.strip():
                response = CircuitResponse("error", error_message="empty request line")
            else:
                response = handle_line(line, self.server.sessions)
            try:
                self.wfile.write(encode(response))
                self.wfile.flush()
            except (ConnectionError, OSError):
                return


class CircuitServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address):
        super().__init__(address, _Handler)
        self.sessions = SessionTable()

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def start_server(bind_address: str = "127.0.0.1", port: int = 0) -> CircuitServer:
    """Bind and serve on a background thread. Port 0 picks a free port."""
    server = CircuitServer((bind_address, port))
    threading.Thread(target=server.serve_forever, name="qmuse-server", daemon=True).start()
    return server


def serve(bind_address: str = "127.0.0.1", port: int = 7777) -> None:
    """Serve until ``shutdown()`` or KeyboardInterrupt."""
    with CircuitServer((bind_address, port)) as server:
        log.info("serving on %s", server.address)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
