"""Round-based note generation and measurement decoding."""
from __future__ import annotations

import numpy as np

from ..qcsim import MeasurementRecord
from .circuit import arming_bits
from .features import NoteEvent
from .model import NoteVocabulary, TransitionModel


def decode_note(c: MeasurementRecord, vocab: NoteVocabulary) -> NoteEvent:
    if len(c) != 6:
        raise ValueError(f"note codes need 6 bits, got {len(c)}")
    set_index = 2 * c.c(0) + c.c(1)
    pitch_index = 2 * c.c(4) + c.c(5)
    duration_index = 2 * c.c(2) + c.c(3)
    return NoteEvent(
        pitch=vocab.pitch_sets[set_index][pitch_index],
        duration=vocab.duration_ms(duration_index),
        loudness=vocab.velocity,
    )


def note_codes(c: MeasurementRecord) -> dict:
    return {"set": 2 * c.c(0) + c.c(1), "pitch": 2 * c.c(4) + c.c(5),
            "duration": 2 * c.c(2) + c.c(3)}


def stacked_angles(models) -> list[list[float]]:
    """Angles for registers X, Y, Z: pitch, duration, loudness models."""
    return [list(map(float, m.angles)) for m in models]


def generate_records(models, n_notes: int, rng: np.random.Generator | None = None,
                     backend=None, arming: str = "swapped") -> list[MeasurementRecord]:
    """Raw 6-bit measurement per round.

    ``models`` is (pitch, duration, loudness). Either an ``rng`` or a backend
    exposing ``transition(angles, armed_bits, shots)`` must be supplied.
    """
    if n_notes < 1:
        raise ValueError(f"n_notes must be >= 1, got {n_notes}")
    models = list(models)
    if len(models) != 3:
        raise ValueError("need exactly 3 transition models (pitch, duration, loudness)")
    if arming not in ("swapped", "direct"):
        raise ValueError(f"arming must be 'swapped' or 'direct', got {arming!r}")
    if backend is None:
        if rng is None:
            raise ValueError("supply either rng or backend")
        from ..backend.local import LocalBackend
        backend = LocalBackend(rng=rng)
    angles = stacked_angles(models)
    records: list[MeasurementRecord] = []
    armed = None
    for _ in range(n_notes):
        (c,) = backend.transition(angles, armed, shots=1)
        records.append(c)
        armed = arming_bits(c, arming)
    return records


def generate_sequence(models, vocab: NoteVocabulary, n_notes: int,
                      rng: np.random.Generator | None = None, backend=None,
                      arming: str = "swapped") -> list[NoteEvent]:
    records = generate_records(models, n_notes, rng=rng, backend=backend, arming=arming)
    return [decode_note(c, vocab) for c in records]
