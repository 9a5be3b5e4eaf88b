"""
Newline-delimited JSON wire format.

Request::

    {"version": 1, "kind": "hyperdie" | "transition" | "health",
     "session": "<token>", "shots": 1, "seed": 42 | null,
     "angles": [[6 floats], [6 floats], [6 floats]],   # transition only
     "armed_bits": [6 bits] | null}                     # transition only

Response::

    {"version": 1, "status": "ok" | "error", "kind": "<request kind>",
     "session": "<token>", "measurements": [[bits], ...], "error": "<text>"}
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..qcsim import MeasurementRecord

PROTOCOL_VERSION = 1
KINDS = ("hyperdie", "transition", "health")
MAX_SHOTS = 100_000
MAX_LINE = 1 << 20


class ProtocolError(ValueError):
    """A message that does not follow the wire schema."""


@dataclass(frozen=True)
class CircuitRequest:
    kind: str
    session: str = "default"
    shots: int = 1
    seed: int | None = None
    angles: tuple[tuple[float, ...], ...] | None = None
    armed_bits: tuple[int, ...] | None = None
    version: int = PROTOCOL_VERSION

    def __post_init__(self):
        if self.version != PROTOCOL_VERSION:
            raise ProtocolError(f"unsupported protocol version {self.version!r}")
        if self.kind not in KINDS:
            raise ProtocolError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not isinstance(self.session, str) or not self.session:
            raise ProtocolError("session must be a non-empty string")
        if not _is_int(self.shots) or not 1 <= self.shots <= MAX_SHOTS:
            raise ProtocolError(f"shots must be an integer in 1..{MAX_SHOTS}")
        if self.seed is not None and (not _is_int(self.seed) or self.seed < 0 or self.seed >= 2**63):
            raise ProtocolError("seed must be null or a non-negative 63-bit integer")
        if self.kind == "transition":
            if self.angles is None:
                raise ProtocolError("transition requests require angles")
            angles = _angles(self.angles)
            object.__setattr__(self, "angles", angles)
            if self.armed_bits is not None:
                bits = self.armed_bits
                if (not isinstance(bits, (list, tuple)) or len(bits) != 6
                        or any(not _is_int(b) or b not in (0, 1) for b in bits)):
                    raise ProtocolError("armed_bits must be a list of 6 bits")
                object.__setattr__(self, "armed_bits", tuple(int(b) for b in bits))
        elif self.angles is not None or self.armed_bits is not None:
            raise ProtocolError(f"{self.kind} requests must not carry angles or armed_bits")

    def to_dict(self) -> dict:
        d = {"version": self.version, "kind": self.kind, "session": self.session,
             "shots": self.shots, "seed": self.seed}
        if self.kind == "transition":
            d["angles"] = [list(row) for row in self.angles]
            d["armed_bits"] = None if self.armed_bits is None else list(self.armed_bits)
        return d


@dataclass(frozen=True)
class CircuitResponse:
    status: str
    kind: str | None = None
    session: str | None = None
    measurements: tuple[MeasurementRecord, ...] = field(default_factory=tuple)
    error_message: str | None = None
    version: int = PROTOCOL_VERSION

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        d = {"version": self.version, "status": self.status, "kind": self.kind,
             "session": self.session, "measurements": [m.tolist() for m in self.measurements]}
        if self.error_message is not None:
            d["error"] = self.error_message
        return d


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _angles(angles) -> tuple[tuple[float, ...], ...]:
    if not isinstance(angles, (list, tuple)) or len(angles) != 3:
        raise ProtocolError("angles must be 3 lists of 6 numbers")
    out = []
    for row in angles:
        if not isinstance(row, (list, tuple)) or len(row) != 6:
            raise ProtocolError("angles must be 3 lists of 6 numbers")
        vals = []
        for a in row:
            if isinstance(a, bool) or not isinstance(a, (int, float)) or not math.isfinite(a):
                raise ProtocolError("angles must be finite numbers")
            vals.append(float(a))
        out.append(tuple(vals))
    return tuple(out)


def encode(message) -> bytes:
    return (json.dumps(message.to_dict(), separators=(",", ":")) + "\n").encode("utf-8")


def _load_object(line) -> dict:
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError(f"message is not valid UTF-8: {exc}") from None
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError("message must be a JSON object")
    return obj


def decode_request(line) -> CircuitRequest:
    obj = _load_object(line)
    if "version" not in obj:
        raise ProtocolError("missing mandatory field 'version'")
    allowed = {"version", "kind", "session", "shots", "seed", "angles", "armed_bits"}
    extra = set(obj) - allowed
    if extra:
        raise ProtocolError(f"unknown field(s) {sorted(extra)}")
    if "kind" not in obj:
        raise ProtocolError("missing field 'kind'")
    return CircuitRequest(**obj)


def decode_response(line) -> CircuitResponse:
    obj = _load_object(line)
    status = obj.get("status")
    if status not in ("ok", "error"):
        raise ProtocolError(f"bad response status {status!r}")
    try:
        records = tuple(MeasurementRecord(m) for m in obj.get("measurements") or [])
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"bad measurements: {exc}") from None
    return CircuitResponse(status=status, kind=obj.get("kind"), session=obj.get("session"),
                           measurements=records, error_message=obj.get("error"),
                           version=obj.get("version", PROTOCOL_VERSION))
