"""Note events, feature extraction, alphabet reduction and transition counting."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ALPHABET_SIZE = 4


@dataclass(frozen=True)
class NoteEvent:
    pitch: int
    duration: int
    loudness: int

    def __post_init__(self):
        for name in ("pitch", "duration", "loudness"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ValueError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside 0..127")
        if self.duration <= 0:
            raise ValueError(f"duration {self.duration} ms must be positive")
        if not 1 <= self.loudness <= 127:
            raise ValueError(f"loudness {self.loudness} outside 1..127")


@dataclass(frozen=True)
class FeatureTrack:
    raw: tuple[int, ...]
    alphabet: tuple[int, ...]
    reduced: tuple[int, ...]

    @property
    def padded(self) -> bool:
        return len(self.alphabet) < ALPHABET_SIZE


def extract_features(notes) -> tuple[list[int], list[int], list[int]]:
    notes = list(notes)
    if not notes:
        raise ValueError("cannot extract features from an empty note list")
    return ([n.pitch for n in notes],
            [n.duration for n in notes],
            [n.loudness for n in notes])


def reduce_alphabet(raw) -> FeatureTrack:
    """Keep the first four distinct values (first-occurrence order) and drop the rest."""
    raw = tuple(int(x) for x in raw)
    if not raw:
        raise ValueError("cannot reduce an empty feature list")
    alphabet: list[int] = []
    for x in raw:
        if x not in alphabet:
            alphabet.append(x)
            if len(alphabet) == ALPHABET_SIZE:
                break
    keep = set(alphabet)
    return FeatureTrack(raw, tuple(alphabet), tuple(x for x in raw if x in keep))


def count_transitions(track: FeatureTrack) -> np.ndarray:
    """counts[i, j] = occurrences of alphabet[i] immediately followed by alphabet[j].

    Always 4x4; rows and columns of symbols missing from a short alphabet stay zero.
    """
    if len(track.reduced) < 2:
        raise ValueError("need at least 2 reduced elements to count transitions")
    index = {s: i for i, s in enumerate(track.alphabet)}
    counts = np.zeros((ALPHABET_SIZE, ALPHABET_SIZE), dtype=np.int64)
    for a, b in zip(track.reduced, track.reduced[1:]):
        counts[index[a], index[b]] += 1
    return counts


def pad_counts(counts: np.ndarray, n_symbols: int) -> np.ndarray:
    """Give each missing symbol a single self-transition so the 4x4 shape stays balanceable."""
    padded = np.array(counts, dtype=np.int64, copy=True)
    for i in range(n_symbols, ALPHABET_SIZE):
        padded[i, i] += 1
    return padded
