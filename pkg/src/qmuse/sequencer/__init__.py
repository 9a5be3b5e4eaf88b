"""Tune analysis, transition models and round-based note generation."""
from .balance import BalanceError, is_doubly_stochastic, sinkhorn, to_bistochastic
from .classical import ClassicalTransitionTable, c_major_rules, classical_generate
from .features import (FeatureTrack, NoteEvent, count_transitions, extract_features,
                       reduce_alphabet)
from .fitting import FitError, build_transition_gate, fit_rotation_angles
from .generate import decode_note, generate_records, generate_sequence
from .model import (NoteVocabulary, TransitionModel, default_vocabulary, fit_model,
                    load_vocabulary)
from .analysis import analyze_notes

__all__ = [
    "BalanceError", "ClassicalTransitionTable", "FeatureTrack", "FitError", "NoteEvent",
    "NoteVocabulary", "TransitionModel", "analyze_notes", "build_transition_gate",
    "c_major_rules", "classical_generate", "count_transitions", "decode_note",
    "default_vocabulary", "extract_features", "fit_model", "fit_rotation_angles",
    "generate_records", "generate_sequence", "is_doubly_stochastic", "load_vocabulary",
    "reduce_alphabet", "sinkhorn", "to_bistochastic",
]
