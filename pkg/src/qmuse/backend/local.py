"""In-process circuit execution; the server runs one of these per session."""
from __future__ import annotations

import numpy as np

from ..hyperdie import roll_hyperdie
from ..qcsim import MeasurementRecord, make_rng
from ..sequencer.circuit import transition_round
from ..sequencer.fitting import build_transition_gate


class LocalBackend:
    """Executes circuits against an exclusively owned PCG64 stream."""

    def __init__(self, seed: int | None = None, rng: np.random.Generator | None = None):
        self.rng = rng if rng is not None else make_rng(seed)

    def hyperdie(self, shots: int = 1) -> list[MeasurementRecord]:
        return [roll_hyperdie(self.rng) for _ in range(shots)]

    def transition(self, angles, armed_bits=None, shots: int = 1) -> list[MeasurementRecord]:
        gates = [build_transition_gate(row) for row in angles]
        return [transition_round(gates, armed_bits, self.rng) for _ in range(shots)]

    def close(self):
        pass
