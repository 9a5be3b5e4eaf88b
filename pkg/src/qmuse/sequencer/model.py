"""Per-feature transition models and the output note vocabulary."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..qcsim import check_orthogonal
from .balance import sinkhorn
from .features import ALPHABET_SIZE, FeatureTrack, count_transitions, pad_counts, reduce_alphabet
from .fitting import DEFAULT_FIT_SEED, DEFAULT_RESTARTS, build_transition_gate, fit_rotation_angles

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SET_NAMES = ("A", "B", "C", "D")


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionModel:
    feature: str
    track: FeatureTrack
    counts: np.ndarray
    bistochastic: np.ndarray
    angles: np.ndarray
    gate: np.ndarray
    residual: float
    balance_iterations: int = 0
    balance_tol: float = 0.0
    balance_newton_steps: int = 0

    @property
    def alphabet(self) -> tuple[int, ...]:
        return self.track.alphabet

    @property
    def padded(self) -> bool:
        return self.track.padded

    def symbol(self, index: int) -> int:
        """Alphabet symbol for a decoded index; indices past a short alphabet
        map to its last real symbol."""
        return self.alphabet[min(index, len(self.alphabet) - 1)]


def fit_model(feature: str, raw, epsilon: float = 1e-3, restarts: int = DEFAULT_RESTARTS,
              seed: int = DEFAULT_FIT_SEED) -> TransitionModel:
    track = reduce_alphabet(raw)
    counts = count_transitions(track)
    bal = sinkhorn(pad_counts(counts, len(track.alphabet)), epsilon=epsilon)
    fit = fit_rotation_angles(bal.matrix, restarts=restarts, seed=seed)
    gate = check_orthogonal(build_transition_gate(fit.angles))
    return TransitionModel(feature, track, counts, bal.matrix, fit.angles, gate,
                           fit.residual, bal.iterations, bal.achieved_tol,
                           bal.newton_steps)


def model_from_angles(feature: str, angles) -> TransitionModel:
    """A model carrying only a gate, e.g. for replaying published angles."""
    angles = np.asarray(angles, dtype=float)
    gate = build_transition_gate(angles)
    empty = FeatureTrack((), (), ())
    nan = np.full((ALPHABET_SIZE, ALPHABET_SIZE), np.nan)
    return TransitionModel(feature, empty, np.zeros((4, 4), dtype=np.int64), nan,
                           angles, gate, float("nan"))


@dataclass(frozen=True)
class NoteVocabulary:
    pitch_sets: tuple[tuple[int, int, int, int], ...]
    durations: tuple[float, float, float, float] = (0.5, 1.0, 2.0, 3.0)
    tempo: float = 120.0
    velocity: int = 96

    def __post_init__(self):
        sets = tuple(tuple(int(p) for p in s) for s in self.pitch_sets)
        object.__setattr__(self, "pitch_sets", sets)
        object.__setattr__(self, "durations", tuple(float(d) for d in self.durations))
        if len(sets) != 4 or any(len(s) != 4 for s in sets):
            raise VocabularyError("pitch_sets must hold exactly 4 sets of 4 pitches")
        if any(not 0 <= p <= 127 for s in sets for p in s):
            raise VocabularyError("pitches must be MIDI numbers 0..127")
        if len(self.durations) != 4 or any(d <= 0 for d in self.durations):
            raise VocabularyError("durations must be 4 positive beat values")
        if not self.tempo > 0:
            raise VocabularyError(f"tempo must be positive, got {self.tempo}")
        if not 1 <= int(self.velocity) <= 127:
            raise VocabularyError(f"velocity {self.velocity} outside 1..127")

    def duration_ms(self, code: int) -> int:
        return int(round(self.durations[code] * 60_000.0 / self.tempo))


def default_vocabulary() -> NoteVocabulary:
    return load_vocabulary(resources.files("qmuse") / "data" / "default_vocab.toml")


def load_vocabulary(path) -> NoteVocabulary:
    path = Path(str(path))
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise VocabularyError(f"{path}: {exc}") from exc
    sets = doc.get("pitch_sets")
    if not isinstance(sets, dict):
        raise VocabularyError(f"{path}: field pitch_sets must be a table with keys A..D")
    try:
        return NoteVocabulary(
            pitch_sets=tuple(sets[name] for name in SET_NAMES),
            durations=tuple(doc.get("durations", (0.5, 1.0, 2.0, 3.0))),
            tempo=float(doc.get("tempo", 120.0)),
            velocity=int(doc.get("velocity", 96)),
        )
    except KeyError as exc:
        raise VocabularyError(f"{path}: field pitch_sets is missing set {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise VocabularyError(f"{path}: {exc}") from None
