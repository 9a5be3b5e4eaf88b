"""
Dense statevector simulator for small registers (1..10 qubits).

Supports exactly what the two music circuits need: Hadamard, RY, a 4x4
real orthogonal "transition" gate on 2-qubit registers, basis-state
preparation and Born-rule sampling.

Basis ordering: qubit 0 is the first-listed qubit of a ket string and the
most significant bit of the basis index, so ``|10>`` is index 2.
Measurement records list bits in that same order.

Random numbers come from numpy's PCG64 bit generator (``make_rng``), which
produces identical streams on every platform for a given seed.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from math import cos, sin, sqrt

import numpy as np

MAX_QUBITS = 10
NORM_TOL = 1e-9
MEASURE_NORM_TOL = 1e-6
ORTHO_TOL = 1e-9

RNG_ALGORITHM = "numpy.random.PCG64"

_H = np.array([[1, 1], [1, -1]], dtype=complex) / sqrt(2)


class CircuitError(ValueError):
    """Invalid register size, qubit index, bit list or gate."""


def make_rng(seed: int | None = None) -> np.random.Generator:
    """Seeded PCG64 generator. ``None`` or ``0`` draws the seed from OS entropy."""
    if seed is None or seed == 0:
        seed = int.from_bytes(os.urandom(8), "little") or 1
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise CircuitError(f"register size must be 1..{MAX_QUBITS}, got {self.n_qubits}")
        if self.amplitudes.shape != (2**self.n_qubits,):
            raise CircuitError(
                f"expected {2**self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True)
class MeasurementRecord:
    """Bits of one measured register, most significant (c_{n-1}) first.

    ``record[i]`` follows list order; ``record.c(i)`` returns the bit the
    music code tables call c_i, i.e. ``bits[n - 1 - i]``.
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise CircuitError(f"measurement bits must be 0/1: {self.bits}")

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, i):
        return self.bits[i]

    def __iter__(self):
        return iter(self.bits)

    def c(self, subscript: int) -> int:
        n = len(self.bits)
        if not 0 <= subscript < n:
            raise CircuitError(f"subscript {subscript} outside 0..{n - 1}")
        return self.bits[n - 1 - subscript]

    def to_index(self) -> int:
        return bits_to_index(self.bits)

    def tolist(self) -> list[int]:
        return list(self.bits)


@dataclass(frozen=True)
class GivensRotation:
    """Rotation by ``angle`` in the plane of basis states ``plane = (i, j)``."""

    plane: tuple[int, int]
    angle: float

    def __post_init__(self):
        i, j = self.plane
        if not (0 <= i < j <= 3):
            raise CircuitError(f"Givens plane must satisfy 0 <= i < j <= 3, got {self.plane}")

    def matrix(self) -> np.ndarray:
        i, j = self.plane
        g = np.eye(4)
        c, s = cos(self.angle), sin(self.angle)
        g[i, i] = c
        g[j, j] = c
        g[i, j] = -s
        g[j, i] = s
        return g


def bits_to_index(bits) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def index_to_bits(index: int, n_qubits: int) -> tuple[int, ...]:
    return tuple((index >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits))


def new_register(n_qubits: int, basis_bits=None) -> StateVector:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise CircuitError(f"register size must be 1..{MAX_QUBITS}, got {n_qubits}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    if basis_bits is None:
        amps[0] = 1.0
    else:
        bits = list(basis_bits)
        if len(bits) != n_qubits:
            raise CircuitError(f"expected {n_qubits} basis bits, got {len(bits)}")
        if any(b not in (0, 1) for b in bits):
            raise CircuitError(f"basis bits must be 0/1: {bits}")
        amps[bits_to_index(bits)] = 1.0
    return StateVector(int(n_qubits), amps)


def _check_qubit(state: StateVector, qubit: int):
    if not 0 <= qubit < state.n_qubits:
        raise CircuitError(f"qubit {qubit} out of range for {state.n_qubits}-qubit register")


def _apply_1q(state: StateVector, matrix: np.ndarray, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    n = state.n_qubits
    psi = state.amplitudes.reshape(2**qubit, 2, 2 ** (n - qubit - 1))
    out = np.einsum("ab,ibj->iaj", matrix, psi).reshape(-1)
    return StateVector(n, out)


def apply_hadamard(state: StateVector, qubit: int) -> StateVector:
    return _apply_1q(state, _H, qubit)


def hadamard_all(state: StateVector) -> StateVector:
    for q in range(state.n_qubits):
        state = apply_hadamard(state, q)
    return state


def ry_matrix(theta: float) -> np.ndarray:
    c, s = cos(theta / 2), sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    return _apply_1q(state, ry_matrix(theta), qubit)


def check_orthogonal(gate: np.ndarray, tol: float = ORTHO_TOL) -> np.ndarray:
    gate = np.asarray(gate, dtype=float)
    if gate.shape != (4, 4):
        raise CircuitError(f"transition gate must be 4x4, got shape {gate.shape}")
    err = np.max(np.abs(gate.T @ gate - np.eye(4)))
    if not err < tol:
        raise CircuitError(f"gate is not orthogonal: max |G^T G - I| = {err:.3e}")
    return gate


def apply_transition_gate(state: StateVector, gate) -> StateVector:
    """Multiply a 2-qubit register by a 4x4 orthogonal matrix (basis 00, 01, 10, 11)."""
    if state.n_qubits != 2:
        raise CircuitError(f"transition gate needs a 2-qubit register, got {state.n_qubits}")
    g = check_orthogonal(gate)
    return StateVector(2, g @ state.amplitudes)


def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one basis index; consumes exactly one ``rng.random()`` call."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), len(probs) - 1)


def measure_all(state: StateVector, rng: np.random.Generator) -> MeasurementRecord:
    probs = probabilities(state)
    total = float(probs.sum())
    if abs(total - 1.0) > MEASURE_NORM_TOL:
        raise CircuitError(f"state norm^2 {total:.9f} deviates from 1")
    return MeasurementRecord(index_to_bits(sample_index(probs, rng), state.n_qubits))
