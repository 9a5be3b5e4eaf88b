"""
The 9-qubit hyper-die and the triplet lookup that turns two die rolls into
a fully resolved synthesizer patch.

A roll is a 9-bit :class:`~qmuse.qcsim.MeasurementRecord` ``[c8, ..., c0]``.
A triplet code names three bit subscripts; its value ``4*b2 + 2*b1 + b0``
(first listed = most significant) indexes an 8-entry parameter table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from . import qcsim
from .qcsim import MeasurementRecord

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

N_DIE_QUBITS = 9
FREQ_MIN, FREQ_MAX = 50.0, 8000.0


class BankError(ValueError):
    """Invalid parameter bank contents or bank file."""


@dataclass(frozen=True)
class TripletCode:
    positions: tuple[int, int, int]

    def __post_init__(self):
        if len(self.positions) != 3:
            raise ValueError(f"triplet needs 3 positions, got {self.positions}")
        for p in self.positions:
            if not 0 <= p < N_DIE_QUBITS:
                raise ValueError(f"triplet position {p} outside 0..{N_DIE_QUBITS - 1}")

    def reversed(self) -> TripletCode:
        return TripletCode(self.positions[::-1])

    def label(self, letter: str = "c") -> str:
        return "(" + " ".join(f"{letter}{p}" for p in self.positions) + ")"


# osc1 start, osc1 end, ..., osc8 end
_FREQ_PATTERNS = [
    (8, 7, 6), (6, 7, 8),
    (5, 4, 3), (3, 4, 5),
    (2, 1, 0), (0, 1, 2),
    (7, 6, 5), (5, 6, 7),
    (4, 3, 2), (2, 3, 4),
    (8, 5, 2), (2, 5, 8),
    (7, 4, 3), (3, 4, 7),
    (6, 3, 0), (0, 3, 6),
]

# Auxiliary codes over the D record; the source table leaves these unspecified.
DURATION_CODE = TripletCode((8, 4, 0))
SILENCE_CODE = TripletCode((6, 4, 2))
VIBRATO_CODE = TripletCode((5, 4, 3))


def frequency_codes() -> list[TripletCode]:
    return [TripletCode(p) for p in _FREQ_PATTERNS]


def amplitude_codes() -> list[TripletCode]:
    # same position patterns, applied to the D record
    return [TripletCode(p) for p in _FREQ_PATTERNS]


@dataclass(frozen=True)
class Envelope:
    """ADSR as fractions of the total sound duration."""

    attack: float = 0.1
    decay: float = 0.1
    sustain_level: float = 0.8
    release: float = 0.2

    def __post_init__(self):
        for name in ("attack", "decay", "release", "sustain_level"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"envelope {name} must be within 0..1, got {v}")
        if self.attack + self.decay + self.release > 1.0 + 1e-12:
            raise ValueError("attack + decay + release must not exceed 1")


@dataclass(frozen=True)
class Oscillator:
    freq_start: float
    freq_end: float
    amp_start: float
    amp_end: float


@dataclass(frozen=True)
class SynthPatch:
    oscillators: tuple[Oscillator, ...]
    duration: float
    silence_after: float = 0.0
    vibrato_rate: float = 0.0
    vibrato_depth: float = 0.0
    envelope: Envelope = field(default_factory=Envelope)

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        validate_patch(self)

    @property
    def amplitude_bound(self) -> float:
        return sum(max(o.amp_start, o.amp_end) for o in self.oscillators)


def validate_patch(patch: SynthPatch) -> None:
    if not 1 <= len(patch.oscillators) <= 8:
        raise ValueError(f"a patch has 1..8 oscillators, got {len(patch.oscillators)}")
    for k, o in enumerate(patch.oscillators, 1):
        for f in (o.freq_start, o.freq_end):
            if not FREQ_MIN <= f <= FREQ_MAX:
                raise ValueError(f"oscillator {k}: frequency {f} outside {FREQ_MIN}..{FREQ_MAX} Hz")
        for a in (o.amp_start, o.amp_end):
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"oscillator {k}: amplitude {a} outside 0..1")
    if not patch.duration > 0:
        raise ValueError(f"duration must be positive, got {patch.duration}")
    if not patch.silence_after >= 0:
        raise ValueError(f"silence_after must be non-negative, got {patch.silence_after}")
    if not patch.vibrato_rate >= 0 or not 0 <= patch.vibrato_depth < 1:
        raise ValueError("vibrato rate must be >= 0 and depth within [0, 1)")


@dataclass(frozen=True)
class ParameterBank:
    freq: tuple[tuple[float, ...], ...]
    amp: tuple[float, ...]
    dur: tuple[float, ...]
    silence: tuple[float, ...]
    vibrato_rate: tuple[float, ...]
    vibrato_depth: float = 0.01
    envelope: Envelope = field(default_factory=Envelope)

    def __post_init__(self):
        for name in ("amp", "dur", "silence", "vibrato_rate"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        object.__setattr__(self, "freq", tuple(tuple(float(x) for x in row) for row in self.freq))
        self.validate()

    def validate(self) -> None:
        if len(self.freq) != 8:
            raise BankError(f"freq: expected 8 oscillator tables, got {len(self.freq)}")
        for k, row in enumerate(self.freq, 1):
            if len(row) != 8:
                raise BankError(f"freq[{k}]: expected 8 values, got {len(row)}")
            for i, f in enumerate(row):
                if not FREQ_MIN <= f <= FREQ_MAX:
                    raise BankError(f"freq[{k}][{i}] = {f} outside {FREQ_MIN}..{FREQ_MAX} Hz")
        for name in ("amp", "dur", "silence", "vibrato_rate"):
            values = getattr(self, name)
            if len(values) != 8:
                raise BankError(f"{name}: expected 8 values, got {len(values)}")
        for i, a in enumerate(self.amp):
            if not 0.0 <= a <= 1.0:
                raise BankError(f"amp[{i}] = {a} outside 0.0..1.0")
        for name in ("dur", "silence"):
            for i, v in enumerate(getattr(self, name)):
                if not v > 0:
                    raise BankError(f"{name}[{i}] = {v} must be strictly positive")
        for i, v in enumerate(self.vibrato_rate):
            if not v >= 0:
                raise BankError(f"vibrato_rate[{i}] = {v} must be non-negative")
        if not 0 <= self.vibrato_depth < 1:
            raise BankError(f"vibrato_depth = {self.vibrato_depth} outside [0, 1)")


def default_bank() -> ParameterBank:
    return load_bank(resources.files("qmuse") / "data" / "default_bank.toml")


def load_bank(path) -> ParameterBank:
    """Read a TOML bank file. Errors name the offending line or field."""
    path = Path(str(path))
    text = path.read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise BankError(f"{path}: {exc}") from exc
    return bank_from_dict(doc, source=str(path))


def bank_from_dict(doc: dict, source: str = "<bank>") -> ParameterBank:
    known = {"freq", "amp", "dur", "silence", "vibrato_rate", "vibrato_depth", "envelope"}
    unknown = set(doc) - known
    if unknown:
        raise BankError(f"{source}: unknown field(s) {sorted(unknown)}")
    missing = {"freq", "amp", "dur", "silence", "vibrato_rate"} - set(doc)
    if missing:
        raise BankError(f"{source}: missing field(s) {sorted(missing)}")
    freq = doc["freq"]
    if isinstance(freq, dict):
        # [freq] table with keys osc1..osc8
        try:
            freq = [freq[f"osc{k}"] for k in range(1, 9)]
        except KeyError as exc:
            raise BankError(f"{source}: field freq is missing {exc.args[0]}") from None
    env = doc.get("envelope", {})
    try:
        envelope = Envelope(**env) if env else Envelope()
    except (TypeError, ValueError) as exc:
        raise BankError(f"{source}: field envelope: {exc}") from None
    try:
        return ParameterBank(
            freq=freq,
            amp=doc["amp"],
            dur=doc["dur"],
            silence=doc["silence"],
            vibrato_rate=doc["vibrato_rate"],
            vibrato_depth=float(doc.get("vibrato_depth", 0.01)),
            envelope=envelope,
        )
    except BankError as exc:
        raise BankError(f"{source}: field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise BankError(f"{source}: malformed value: {exc}") from None


@lru_cache(maxsize=1)
def _die_probabilities() -> np.ndarray:
    state = qcsim.hadamard_all(qcsim.new_register(N_DIE_QUBITS))
    probs = qcsim.probabilities(state)
    probs.setflags(write=False)
    return probs


def roll_hyperdie(rng: np.random.Generator) -> MeasurementRecord:
    """Measure H^9 |0...0>. The prepared state is built once and reused."""
    probs = _die_probabilities()
    idx = qcsim.sample_index(probs, rng)
    return MeasurementRecord(qcsim.index_to_bits(idx, N_DIE_QUBITS))


def decode_triplet(record: MeasurementRecord, code: TripletCode) -> int:
    if len(record) != N_DIE_QUBITS:
        raise ValueError(f"hyper-die record must have 9 bits, got {len(record)}")
    b2, b1, b0 = (record.c(p) for p in code.positions)
    return 4 * b2 + 2 * b1 + b0


def build_patch(c_record: MeasurementRecord, d_record: MeasurementRecord,
                bank: ParameterBank) -> SynthPatch:
    bank.validate()
    fcodes = frequency_codes()
    acodes = amplitude_codes()
    oscs = []
    for k in range(8):
        table = bank.freq[k]
        oscs.append(Oscillator(
            freq_start=table[decode_triplet(c_record, fcodes[2 * k])],
            freq_end=table[decode_triplet(c_record, fcodes[2 * k + 1])],
            amp_start=bank.amp[decode_triplet(d_record, acodes[2 * k])],
            amp_end=bank.amp[decode_triplet(d_record, acodes[2 * k + 1])],
        ))
    return SynthPatch(
        oscillators=tuple(oscs),
        duration=bank.dur[decode_triplet(d_record, DURATION_CODE)],
        silence_after=bank.silence[decode_triplet(d_record, SILENCE_CODE)],
        vibrato_rate=bank.vibrato_rate[decode_triplet(d_record, VIBRATO_CODE)],
        vibrato_depth=bank.vibrato_depth,
        envelope=bank.envelope,
    )


def patch_parameters(patch: SynthPatch) -> dict:
    """Flat parameter names (freq1s, amp1e, ...) for manifests and reports."""
    out = {}
    for k, o in enumerate(patch.oscillators, 1):
        out[f"freq{k}s"] = o.freq_start
        out[f"freq{k}e"] = o.freq_end
        out[f"amp{k}s"] = o.amp_start
        out[f"amp{k}e"] = o.amp_end
    out.update(
        duration=patch.duration,
        silence_after=patch.silence_after,
        vibrato_rate=patch.vibrato_rate,
        vibrato_depth=patch.vibrato_depth,
        envelope=[patch.envelope.attack, patch.envelope.decay,
                  patch.envelope.sustain_level, patch.envelope.release],
    )
    return out
