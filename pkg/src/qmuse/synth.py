"""
Additive synthesis: eight phase-accumulating sine oscillators with linear
frequency and amplitude ramps, a shared vibrato LFO and an ADSR envelope,
plus a 16-bit PCM WAV writer/reader.
"""
from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .hyperdie import Envelope, SynthPatch, validate_patch

DEFAULT_SAMPLE_RATE = 44100
MIN_SAMPLE_RATE = 8000
PCM_SCALE = 32767


class ClipError(ValueError):
    """Rendered or supplied samples exceed the [-1, 1] range."""


@dataclass(frozen=True)
class SampleBuffer:
    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise ClipError(f"sample magnitude {np.max(np.abs(samples)):.6f} exceeds 1.0")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def n_samples(seconds: float, sample_rate: int) -> int:
    return int(round(seconds * sample_rate))


def adsr(envelope: Envelope, n: int) -> np.ndarray:
    """Piecewise-linear envelope over ``n`` samples; fractions of the whole span."""
    if n == 0:
        return np.zeros(0)
    u = np.arange(n) / max(n - 1, 1)
    a, d, s, r = envelope.attack, envelope.decay, envelope.sustain_level, envelope.release
    env = np.full(n, s, dtype=float)
    if a > 0:
        m = u < a
        env[m] = u[m] / a
    if d > 0:
        m = (u >= a) & (u < a + d)
        env[m] = 1.0 - (1.0 - s) * (u[m] - a) / d
    if r > 0:
        m = u > 1.0 - r
        env[m] = s * (1.0 - u[m]) / r
    return env


def oscillator_phases(patch: SynthPatch, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    """Accumulated phase and amplitude ramp, shape (n_osc, n_samples).

    phase[0] = 0 for every oscillator; each later sample adds
    2*pi*f_inst/sr of the preceding sample.
    """
    n = n_samples(patch.duration, sample_rate)
    t = np.arange(n) / sample_rate
    frac = t / patch.duration
    fs = np.array([o.freq_start for o in patch.oscillators])[:, None]
    fe = np.array([o.freq_end for o in patch.oscillators])[:, None]
    as_ = np.array([o.amp_start for o in patch.oscillators])[:, None]
    ae = np.array([o.amp_end for o in patch.oscillators])[:, None]
    freq = fs + (fe - fs) * frac
    if patch.vibrato_depth > 0 and patch.vibrato_rate > 0:
        freq = freq * (1.0 + patch.vibrato_depth * np.sin(2 * np.pi * patch.vibrato_rate * t))
    amp = as_ + (ae - as_) * frac
    step = 2 * np.pi * freq / sample_rate
    phase = np.zeros_like(step)
    np.cumsum(step[:, :-1], axis=1, out=phase[:, 1:])
    return phase, amp


def render_raw(patch: SynthPatch, sample_rate: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Oscillator sum before the envelope."""
    phase, amp = oscillator_phases(patch, sample_rate)
    return np.sum(amp * np.sin(phase), axis=0)


def render(patch: SynthPatch, sample_rate: int = DEFAULT_SAMPLE_RATE,
           gain: float = 1.0) -> SampleBuffer:
    """Render one patch. ``gain`` is an explicit output scale; nothing is
    normalized behind the caller's back, and a peak above 1.0 is an error."""
    validate_patch(patch)
    if sample_rate < MIN_SAMPLE_RATE:
        raise ValueError(f"sample_rate must be >= {MIN_SAMPLE_RATE}, got {sample_rate}")
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    raw = render_raw(patch, sample_rate)
    out = gain * raw * adsr(patch.envelope, raw.size)
    peak = float(np.max(np.abs(out))) if out.size else 0.0
    if peak > 1.0:
        raise ClipError(
            f"rendered peak {peak:.4f} exceeds 1.0 (amplitude sum {patch.amplitude_bound:.3f}, "
            f"gain {gain}); lower the gain or the bank amplitudes"
        )
    return SampleBuffer(sample_rate, out)


def render_sequence(patches, sample_rate: int = DEFAULT_SAMPLE_RATE,
                    gain: float = 1.0) -> SampleBuffer:
    patches = list(patches)
    if not patches:
        raise ValueError("render_sequence needs at least one patch")
    parts = []
    for p in patches:
        parts.append(render(p, sample_rate, gain).samples)
        parts.append(np.zeros(n_samples(p.silence_after, sample_rate)))
    return SampleBuffer(sample_rate, np.concatenate(parts))


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.size and np.max(np.abs(samples)) > 1.0:
        raise ClipError("sample magnitude exceeds 1.0; not representable as PCM")
    return np.round(samples * PCM_SCALE).astype("<i2")


def write_wav(buffer: SampleBuffer, path) -> None:
    """Mono 16-bit little-endian PCM with the canonical 44-byte header."""
    pcm = to_pcm16(buffer.samples)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(buffer.sample_rate))
        w.writeframes(pcm.tobytes())


def read_wav(path) -> SampleBuffer:
    with wave.open(str(Path(path)), "rb") as w:
        if w.getnchannels() != 1 or w.getsampwidth() != 2:
            raise ValueError(f"{path}: only mono 16-bit PCM is supported")
        rate = w.getframerate()
        data = w.readframes(w.getnframes())
    pcm = np.frombuffer(data, dtype="<i2").astype(float)
    return SampleBuffer(rate, np.clip(pcm / PCM_SCALE, -1.0, 1.0))
