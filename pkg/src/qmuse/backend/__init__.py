"""Circuit execution backends: in-process, or a TCP server holding seeded sessions."""
from .client import (BackendConnectionError, BackendError, BackendTimeoutError, CircuitClient,
                     RemoteBackend, RemoteProtocolError, client_run)
from .local import LocalBackend
from .protocol import (PROTOCOL_VERSION, CircuitRequest, CircuitResponse, ProtocolError,
                       decode_request, decode_response, encode)
from .server import CircuitServer, handle_line, serve, start_server


def make_backend(target: str = "local", seed: int | None = None, session: str | None = None,
                 timeout: float = 10.0):
    """``"local"`` or ``"host:port"``."""
    if target == "local":
        return LocalBackend(seed=seed)
    return RemoteBackend(target, seed=seed, session=session, timeout=timeout)


__all__ = [
    "BackendConnectionError", "BackendError", "BackendTimeoutError", "CircuitClient",
    "CircuitRequest", "CircuitResponse", "CircuitServer", "LocalBackend", "PROTOCOL_VERSION",
    "ProtocolError", "RemoteBackend", "RemoteProtocolError", "client_run", "decode_request",
    "decode_response", "encode", "handle_line", "make_backend", "serve", "start_server",
]
