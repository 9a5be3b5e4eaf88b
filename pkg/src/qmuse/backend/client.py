"""Client side of the circuit protocol."""
from __future__ import annotations

import socket
import uuid

from .protocol import (MAX_LINE, CircuitRequest, CircuitResponse, ProtocolError,
                       decode_response, encode)

DEFAULT_TIMEOUT = 10.0


class BackendError(RuntimeError):
    pass


class BackendConnectionError(BackendError):
    """Server unreachable or connection dropped."""


class BackendTimeoutError(BackendError):
    """No response within the timeout."""


class RemoteProtocolError(BackendError):
    """The server's reply broke the wire schema or reported an error."""


def parse_address(address) -> tuple[str, int]:
    if isinstance(address, tuple):
        return address[0], int(address[1])
    host, sep, port = str(address).rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must be host:port, got {address!r}")
    return host or "127.0.0.1", int(port)


class CircuitClient:
    """Persistent connection that reconnects on demand."""

    def __init__(self, address, timeout: float = DEFAULT_TIMEOUT):
        self.address = parse_address(address)
        self.timeout = timeout
        self._sock = None
        self._file = None

    def _connect(self):
        try:
            self._sock = socket.create_connection(self.address, timeout=self.timeout)
        except socket.timeout as exc:
            raise BackendTimeoutError(f"connecting to {self.address} timed out") from exc
        except OSError as exc:
            raise BackendConnectionError(f"cannot connect to {self.address}: {exc}") from exc
        self._file = self._sock.makefile("rb")

    def close(self):
        if self._file is not None:
            self._file.close()
        if self._sock is not None:
            self._sock.close()
        self._sock = self._file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def send_line(self, payload: bytes) -> bytes:
        if self._sock is None:
            self._connect()
        try:
            self._sock.sendall(payload)
            line = self._file.readline(MAX_LINE + 1)
        except socket.timeout as exc:
            self.close()
            raise BackendTimeoutError(f"no response from {self.address} within {self.timeout}s") from exc
        except OSError as exc:
            self.close()
            raise BackendConnectionError(f"connection to {self.address} failed: {exc}") from exc
        if not line:
            self.close()
            raise BackendConnectionError(f"{self.address} closed the connection")
        return line

    def run(self, request: CircuitRequest) -> CircuitResponse:
        line = self.send_line(encode(request))
        try:
            response = decode_response(line)
        except ProtocolError as exc:
            raise RemoteProtocolError(str(exc)) from exc
        if response.ok:
            if response.kind != request.kind:
                raise RemoteProtocolError(f"response kind {response.kind!r} != {request.kind!r}")
            if request.kind != "health" and len(response.measurements) != request.shots:
                raise RemoteProtocolError("response shot count does not match request")
        return response


def client_run(address, request: CircuitRequest, timeout: float = DEFAULT_TIMEOUT) -> CircuitResponse:
    with CircuitClient(address, timeout) as client:
        return client.run(request)


class RemoteBackend:
    """Same interface as LocalBackend, executed on a server session.

    Every request carries the session token and seed, so a fresh connection
    resumes the same stream.
    """

    def __init__(self, address, seed: int | None = None, session: str | None = None,
                 timeout: float = DEFAULT_TIMEOUT):
        self.client = CircuitClient(address, timeout)
        self.seed = seed
        self.session = session or uuid.uuid4().hex

    def _run(self, request: CircuitRequest):
        response = self.client.run(request)
        if not response.ok:
            raise RemoteProtocolError(f"server error: {response.error_message}")
        return list(response.measurements)

    def hyperdie(self, shots: int = 1):
        return self._run(CircuitRequest("hyperdie", self.session, shots, self.seed))

    def transition(self, angles, armed_bits=None, shots: int = 1):
        return self._run(CircuitRequest(
            "transition", self.session, shots, self.seed,
            angles=tuple(tuple(float(a) for a in row) for row in angles),
            armed_bits=None if armed_bits is None else tuple(armed_bits)))

    def close(self):
        self.client.close()
