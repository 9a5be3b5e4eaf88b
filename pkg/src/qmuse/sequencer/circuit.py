"""One generation round of the three 2-qubit transition registers."""
from __future__ import annotations

import numpy as np

from .. import qcsim
from ..qcsim import MeasurementRecord

N_REGISTERS = 3
ARMING_MODES = ("swapped", "direct")


def prepare_register(armed_pair=None) -> qcsim.StateVector:
    """H x H |00> for a first round, otherwise the armed basis state."""
    if armed_pair is None:
        return qcsim.hadamard_all(qcsim.new_register(2))
    return qcsim.new_register(2, armed_pair)


def transition_round(gates, armed_bits, rng: np.random.Generator) -> MeasurementRecord:
    """Run registers X, Y, Z in that order and concatenate their bits into
    ``[c5, c4, c3, c2, c1, c0]``. Consumes one random draw per register."""
    if len(gates) != N_REGISTERS:
        raise ValueError(f"need {N_REGISTERS} gates, got {len(gates)}")
    if armed_bits is not None:
        armed_bits = [int(b) for b in armed_bits]
        if len(armed_bits) != 2 * N_REGISTERS or any(b not in (0, 1) for b in armed_bits):
            raise ValueError(f"armed_bits must be 6 bits, got {armed_bits}")
    bits: list[int] = []
    for r, gate in enumerate(gates):
        pair = None if armed_bits is None else armed_bits[2 * r:2 * r + 2]
        state = qcsim.apply_transition_gate(prepare_register(pair), gate)
        bits.extend(qcsim.measure_all(state, rng).bits)
    return MeasurementRecord(bits)


def arming_bits(record: MeasurementRecord, arming: str = "swapped") -> list[int]:
    """Basis bits for the next round. ``swapped`` arms |c4 c5 c2 c3 c0 c1>."""
    c = list(record.bits)
    if arming == "swapped":
        return [c[1], c[0], c[3], c[2], c[5], c[4]]
    if arming == "direct":
        return c
    raise ValueError(f"arming must be one of {ARMING_MODES}, got {arming!r}")
