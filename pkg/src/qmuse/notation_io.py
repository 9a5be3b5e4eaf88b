"""
Note-event I/O: a monophonic Standard MIDI File subset and a plain-text list.

Text format, one note per line::

    # tempo = 120
    67 298 113        # pitch  duration_ms  velocity

Blank lines and ``#`` comments are ignored, except a ``# tempo = <bpm>``
line, which sets the list tempo.
"""
from __future__ import annotations

import logging
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .sequencer.features import NoteEvent

log = logging.getLogger(__name__)

DEFAULT_TEMPO = 120.0
DEFAULT_TICKS_PER_QUARTER = 480

_TEMPO_RE = re.compile(r"^#\s*tempo\s*[:=]\s*([0-9.eE+-]+)\s*$")


class MidiError(ValueError):
    """Malformed or unsupported Standard MIDI File."""


class NoteParseError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.line_no = line_no


@dataclass
class NoteList:
    notes: list[NoteEvent] = field(default_factory=list)
    tempo: float = DEFAULT_TEMPO

    def __len__(self):
        return len(self.notes)

    def __iter__(self):
        return iter(self.notes)


# --- text -----------------------------------------------------------------

def parse_text(text: str, source: str = "<text>") -> NoteList:
    notes = []
    tempo = DEFAULT_TEMPO
    for no, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = _TEMPO_RE.match(stripped)
        if m:
            try:
                tempo = float(m.group(1))
            except ValueError:
                raise NoteParseError(source, no, f"bad tempo {m.group(1)!r}") from None
            if not tempo > 0:
                raise NoteParseError(source, no, f"tempo must be positive, got {tempo}")
            continue
        body = stripped.split("#", 1)[0].strip()
        if not body:
            continue
        fields = body.split()
        if len(fields) != 3:
            raise NoteParseError(source, no, f"expected 'pitch duration_ms velocity', got {body!r}")
        try:
            pitch, dur, vel = (int(f) for f in fields)
        except ValueError:
            raise NoteParseError(source, no, f"non-integer field in {body!r}") from None
        try:
            notes.append(NoteEvent(pitch, dur, vel))
        except ValueError as exc:
            raise NoteParseError(source, no, str(exc)) from None
    return NoteList(notes, tempo)


def read_text(path) -> NoteList:
    path = Path(path)
    return parse_text(path.read_text(encoding="utf-8"), str(path))


def format_text(notes: NoteList) -> str:
    lines = [f"# tempo = {notes.tempo:g}", "# pitch duration_ms velocity"]
    lines += [f"{n.pitch} {n.duration} {n.loudness}" for n in notes.notes]
    return "\n".join(lines) + "\n"


def write_text(notes: NoteList, path) -> None:
    Path(path).write_text(format_text(notes), encoding="utf-8")


# --- MIDI: low level ------------------------------------------------------

def encode_vlq(value: int) -> bytes:
    if not 0 <= value <= 0x0FFFFFFF:
        raise MidiError(f"delta time {value} not representable")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


class _Reader:
    def __init__(self, data: bytes, where: str):
        self.data = data
        self.pos = 0
        self.where = where

    def eof(self) -> bool:
        return self.pos >= len(self.data)

    def byte(self) -> int:
        if self.pos >= len(self.data):
            raise MidiError(f"{self.where}: unexpected end of data")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MidiError(f"{self.where}: unexpected end of data")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def vlq(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiError(f"{self.where}: variable-length quantity longer than 4 bytes")


_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


@dataclass
class _Event:
    tick: int
    order: int  # note-offs sort before note-ons at the same tick
    seq: tuple[int, int]
    kind: str
    a: int = 0
    b: int = 0


def _parse_track(data: bytes, track_no: int) -> list[_Event]:
    r = _Reader(data, f"track {track_no}")
    events = []
    tick = 0
    running = None
    seq = 0
    while not r.eof():
        tick += r.vlq()
        status = r.byte()
        if status == 0xFF:
            mtype = r.byte()
            payload = r.take(r.vlq())
            running = None
            if mtype == 0x51:
                if len(payload) != 3:
                    raise MidiError(f"track {track_no}: tempo event must carry 3 bytes")
                events.append(_Event(tick, 0, (track_no, seq), "tempo", int.from_bytes(payload, "big")))
            elif mtype == 0x2F:
                break
            else:
                log.debug("track %d: skipping meta event 0x%02X", track_no, mtype)
            seq += 1
            continue
        if status in (0xF0, 0xF7):
            r.take(r.vlq())
            running = None
            log.debug("track %d: skipping sysex", track_no)
            continue
        if status < 0x80:
            if running is None:
                raise MidiError(f"track {track_no}: data byte 0x{status:02X} without running status")
            r.pos -= 1
            status = running
        elif status >= 0xF0:
            raise MidiError(f"track {track_no}: system message 0x{status:02X} not allowed in SMF")
        else:
            running = status
        kind = status & 0xF0
        data_bytes = r.take(_DATA_LEN[kind])
        if any(b & 0x80 for b in data_bytes):
            raise MidiError(f"track {track_no}: status byte where data byte expected")
        if kind == 0x90 and data_bytes[1] > 0:
            events.append(_Event(tick, 1, (track_no, seq), "on", data_bytes[0], data_bytes[1]))
        elif kind == 0x80 or kind == 0x90:
            events.append(_Event(tick, 0, (track_no, seq), "off", data_bytes[0]))
        else:
            log.debug("track %d: skipping channel message 0x%02X", track_no, status)
        seq += 1
    return events


class _TempoMap:
    def __init__(self, tempos, division: int, smpte: tuple[float, int] | None):
        self.division = division
        self.smpte = smpte
        points = [(0, 500_000)]
        for tick, tempo in tempos:
            if tick == points[-1][0]:
                points[-1] = (tick, tempo)
            else:
                points.append((tick, tempo))
        self.points = points
        self.us_at = [0.0]
        for (t0, tempo), (t1, _) in zip(points, points[1:]):
            self.us_at.append(self.us_at[-1] + (t1 - t0) * tempo / division)

    def microseconds(self, tick: int) -> float:
        if self.smpte is not None:
            fps, tpf = self.smpte
            return tick * 1e6 / (fps * tpf)
        k = 0
        while k + 1 < len(self.points) and self.points[k + 1][0] <= tick:
            k += 1
        t0, tempo = self.points[k]
        return self.us_at[k] + (tick - t0) * tempo / self.division


def read_midi(path) -> NoteList:
    """Monophonic note list from an SMF (format 0 or 1).

    Tracks are merged on absolute time. A note-on while another note sounds
    truncates the sounding note at that onset; notes still open at the end are
    logged and dropped.
    """
    data = Path(path).read_bytes()
    r = _Reader(data, str(path))
    if r.take(4) != b"MThd":
        raise MidiError(f"{path}: missing MThd header")
    hlen = struct.unpack(">I", r.take(4))[0]
    if hlen < 6:
        raise MidiError(f"{path}: header chunk too short ({hlen})")
    fmt, ntrks, division = struct.unpack(">HHH", r.take(6))
    r.take(hlen - 6)
    if fmt not in (0, 1):
        raise MidiError(f"{path}: SMF format {fmt} not supported")
    smpte = None
    if division & 0x8000:
        fps = 256 - (division >> 8)
        tpf = division & 0xFF
        if fps not in (24, 25, 29, 30) or tpf == 0:
            raise MidiError(f"{path}: bad SMPTE division 0x{division:04X}")
        smpte = (29.97 if fps == 29 else fps, tpf)
    elif division == 0:
        raise MidiError(f"{path}: division must be positive")
    events: list[_Event] = []
    found = 0
    while not r.eof() and found < ntrks:
        ctype = r.take(4)
        clen = struct.unpack(">I", r.take(4))[0]
        body = r.take(clen)
        if ctype != b"MTrk":
            log.debug("skipping chunk %r", ctype)
            continue
        events.extend(_parse_track(body, found))
        found += 1
    if found < ntrks:
        raise MidiError(f"{path}: header declares {ntrks} tracks, found {found}")

    events.sort(key=lambda e: (e.tick, e.order, e.seq))
    tempos = [(e.tick, e.a) for e in events if e.kind == "tempo"]
    tmap = _TempoMap(tempos, division, smpte)
    bpm = 60e6 / tempos[0][1] if tempos and tempos[0][1] > 0 else DEFAULT_TEMPO

    notes = []
    sounding = None  # (pitch, start_tick, velocity)

    def close(end_tick):
        pitch, start, vel = sounding
        ms = round((tmap.microseconds(end_tick) - tmap.microseconds(start)) / 1000.0)
        if ms > 0:
            notes.append(NoteEvent(pitch, ms, vel))
        else:
            log.debug("dropping zero-length note %d at tick %d", pitch, start)

    for e in events:
        if e.kind == "on":
            if sounding is not None:
                close(e.tick)
            sounding = (e.a, e.tick, e.b)
        elif e.kind == "off" and sounding is not None and e.a == sounding[0]:
            close(e.tick)
            sounding = None
    if sounding is not None:
        log.warning("%s: note %d at tick %d never released; dropped", path, sounding[0], sounding[1])
    return NoteList(notes, bpm)


def midi_bytes(notes: NoteList, ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER,
               channel: int = 0) -> bytes:
    if not 0 <= channel <= 15:
        raise ValueError("channel must be 0..15")
    track = bytearray()
    if notes.notes:
        tempo_us = int(round(60e6 / notes.tempo))
        track += b"\x00\xFF\x51\x03" + tempo_us.to_bytes(3, "big")
        ticks_per_ms = ticks_per_quarter * notes.tempo / 60_000.0
        for n in notes.notes:
            ticks = max(1, int(round(n.duration * ticks_per_ms)))
            track += b"\x00" + bytes([0x90 | channel, n.pitch, n.loudness])
            track += encode_vlq(ticks) + bytes([0x80 | channel, n.pitch, 64])
    track += b"\x00\xFF\x2F\x00"
    header = b"MThd" + struct.pack(">IHHH", 6, 0, 1, ticks_per_quarter)
    return header + b"MTrk" + struct.pack(">I", len(track)) + bytes(track)


def write_midi(notes: NoteList, path, ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER) -> None:
    """Format 0, one track, channel 1, notes back to back."""
    Path(path).write_bytes(midi_bytes(notes, ticks_per_quarter))


def read_notes(path) -> NoteList:
    """MIDI if the file starts with ``MThd``, otherwise the text format."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(4)
    return read_midi(path) if magic == b"MThd" else read_text(path)
