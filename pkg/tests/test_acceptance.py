"""Acceptance criteria 1-12. Run alone with ``pytest tests/test_acceptance.py``;
a PASS/FAIL line per criterion is printed in the terminal summary."""
import hashlib
import json
import random
import socket
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmuse.backend import CircuitRequest, LocalBackend, encode, start_server
from qmuse.cli import main
from qmuse.hyperdie import build_patch, default_bank, patch_parameters, roll_hyperdie
from qmuse.notation_io import read_midi
from qmuse.qcsim import MeasurementRecord, make_rng
from qmuse import qcsim
from qmuse.sequencer import (build_transition_gate, c_major_rules, classical_generate,
                             count_transitions, decode_note, default_vocabulary,
                             fit_rotation_angles, reduce_alphabet, sinkhorn, to_bistochastic)
from qmuse.sequencer.circuit import prepare_register, transition_round
from qmuse.sequencer.fitting import residual
from qmuse.sequencer.model import fit_model
from qmuse.synth import render, render_raw
from qmuse.hyperdie import Envelope, Oscillator, SynthPatch

from .conftest import (BEETHOVEN_D, BEETHOVEN_L, BEETHOVEN_P, D_REDUCED, L_REDUCED, P_COUNTS,
                       P_REDUCED, EXAMPLE_C, EXAMPLE_D)
from .test_synth import stft_centroid

ac = pytest.mark.acceptance
SR = 44_100


@ac(1, "alphabet reduction reproduces P', D', L' exactly")
def test_ac01_alphabet_reduction():
    t0 = time.perf_counter()
    tracks = [reduce_alphabet(x) for x in (BEETHOVEN_P, BEETHOVEN_D, BEETHOVEN_L)]
    elapsed = time.perf_counter() - t0
    assert [list(t.reduced) for t in tracks] == [P_REDUCED, D_REDUCED, L_REDUCED]
    assert [len(t.reduced) for t in tracks] == [13, 12, 12]
    assert elapsed < 1e-3


@ac(2, "pitch transition counts match the published count matrix")
def test_ac02_transition_counts():
    assert count_transitions(reduce_alphabet(BEETHOVEN_P)).tolist() == P_COUNTS


def _check_bistochastic(counts):
    t0 = time.perf_counter()
    b = to_bistochastic(counts)
    assert time.perf_counter() - t0 < 0.01
    assert np.all(b > 0)
    assert np.max(np.abs(b.sum(axis=0) - 1)) <= 1e-9
    assert np.max(np.abs(b.sum(axis=1) - 1)) <= 1e-9
    return b


@ac(3, "Sinkhorn balancing: sums within 1e-9, positive, relabel-equivariant, < 10 ms")
@settings(max_examples=1000, deadline=None, derandomize=True)
@given(st.lists(st.integers(0, 30), min_size=16, max_size=16), st.permutations(range(4)))
def test_ac03_bistochastic(values, perm):
    for counts in (np.array(P_COUNTS), np.array(values).reshape(4, 4)):
        b = _check_bistochastic(counts)
        perm = list(perm)
        bp = _check_bistochastic(counts[np.ix_(perm, perm)])
        assert np.allclose(bp, b[np.ix_(perm, perm)], atol=1e-9)


@ac(4, "angle fitting: exact targets reach <= 1e-6; published counts beat theta = 0; < 5 s/fit")
def test_ac04_angle_fitting():
    targets = [np.eye(4), np.eye(4)[[1, 0, 2, 3]], np.full((4, 4), 0.25)]
    for b in targets:
        t0 = time.perf_counter()
        fit = fit_rotation_angles(b, restarts=64)
        assert time.perf_counter() - t0 < 5.0
        assert fit.residual <= 1e-6
    b = sinkhorn(np.array(P_COUNTS)).matrix
    t0 = time.perf_counter()
    fit = fit_rotation_angles(b, restarts=64)
    assert time.perf_counter() - t0 < 5.0
    assert fit.residual <= residual(np.zeros(6), b)
    gate = build_transition_gate(fit.angles)
    assert np.max(np.abs(gate.T @ gate - np.eye(4))) < 1e-9


@ac(5, "note decoding reproduces both worked decodings")
def test_ac05_note_decoding():
    vocab = default_vocabulary()
    sets = vocab.pitch_sets
    n = decode_note(MeasurementRecord([0, 1, 1, 0, 1, 0]), vocab)
    assert n.pitch == sets[1][2] == 63 and n.duration == vocab.duration_ms(1)
    n = decode_note(MeasurementRecord([1, 1, 1, 1, 0, 0]), vocab)
    assert n.pitch == sets[0][3] == 67 and n.duration == vocab.duration_ms(3)
    assert vocab.durations[1] == 1.0 and vocab.durations[3] == 3.0


@ac(6, "Markov fidelity: armed conditionals exact to 1e-12, 20,000 rounds within 4 sigma")
def test_ac06_markov_fidelity():
    t0 = time.perf_counter()
    gates = [fit_model(f, raw).gate
             for f, raw in zip(("pitch", "duration", "loudness"), (BEETHOVEN_P, BEETHOVEN_D, BEETHOVEN_L))]
    for u in gates:
        for j in range(4):
            state = qcsim.apply_transition_gate(prepare_register(qcsim.index_to_bits(j, 2)), u)
            assert np.max(np.abs(qcsim.probabilities(state) - u[:, j] ** 2)) <= 1e-12
    rng, pick = make_rng(606), make_rng(607)
    tallies = np.zeros((3, 4, 4))
    for _ in range(20_000):
        armed = [int(b) for b in pick.integers(0, 2, 6)]
        rec = transition_round(gates, armed, rng)
        for r in range(3):
            j = 2 * armed[2 * r] + armed[2 * r + 1]
            i = 2 * rec.bits[2 * r] + rec.bits[2 * r + 1]
            tallies[r, i, j] += 1
    for r, u in enumerate(gates):
        n_j = tallies[r].sum(axis=0)
        p = u ** 2
        bound = 4 * np.sqrt(p * (1 - p) / n_j) + 1e-12
        assert np.all(np.abs(tallies[r] / n_j - p) <= bound)
    assert time.perf_counter() - t0 < 10.0


@ac(7, "hyper-die: 51,200 rolls, per-bit 0.5 +/- 0.007, chi-square < 610.6, < 5 s")
def test_ac07_hyperdie_statistics():
    t0 = time.perf_counter()
    rng = make_rng(7)
    idx = np.array([roll_hyperdie(rng).to_index() for _ in range(51_200)])
    bits = (idx[:, None] >> np.arange(9)) & 1
    assert np.all(np.abs(bits.mean(axis=0) - 0.5) <= 0.007)
    counts = np.bincount(idx, minlength=512)
    assert np.sum((counts - 100.0) ** 2 / 100.0) < 610.6
    assert time.perf_counter() - t0 < 5.0


# rows whose printed triplet values contradict the printed records
KNOWN_ERRATA = ("freq5s", "freq5e", "freq7s", "freq7e", "freq8s", "freq8e",
                "amp5s", "amp5e", "amp6s", "amp6e", "amp7s")


@ac(8, "triplet decoding reproduces every self-consistent parameter-table row")
def test_ac08_triplet_decoding():
    c = MeasurementRecord(EXAMPLE_C[0])
    d = MeasurementRecord(EXAMPLE_D[0])
    params = patch_parameters(build_patch(c, d, default_bank()))
    expected = {
        "freq1s": 55.0, "freq1e": 55.0, "freq2s": 369.99, "freq2e": 466.16,
        "freq3s": 349.23, "freq3e": 87.3, "freq4s": 92.49, "freq4e": 92.49,
        "amp1s": 0.08, "amp1e": 0.14, "amp2s": 0.12, "amp2e": 0.18,
        "amp3s": 0.06, "amp3e": 0.06, "amp4s": 0.1, "amp4e": 0.1,
    }
    assert {k: params[k] for k in expected} == expected
    assert not set(expected) & set(KNOWN_ERRATA)


def _one(f0, f1, duration=2.0):
    return SynthPatch((Oscillator(f0, f1, 0.5, 0.5),), duration, 0.0, 0.0, 0.0,
                      Envelope(0.0, 0.0, 1.0, 0.0))


@ac(9, "synthesis: 440 Hz peak, ramp midpoint centroid, linearity, sample count, < 5 s")
def test_ac09_synthesis():
    t0 = time.perf_counter()
    tone = render(_one(440.0, 440.0), SR).samples
    assert tone.size == 88_200
    mag = np.abs(np.fft.rfft(tone))
    bin_hz = SR / tone.size
    assert abs(np.argmax(mag) * bin_hz - 440.0) <= bin_hz
    ramp = render(_one(2354.63, 3960.0), SR).samples
    assert abs(stft_centroid(ramp, SR, ramp.size // 2) - 3157.3) <= 0.05 * 3157.3
    o1, o2 = Oscillator(220, 660, 0.3, 0.1), Oscillator(1000, 150, 0.05, 0.4)
    env = Envelope()
    mk = lambda *o: SynthPatch(o, 2.0, 0.0, 5.0, 0.0, env)  # noqa: E731
    diff = render_raw(mk(o1), SR) + render_raw(mk(o2), SR) - render_raw(mk(o1, o2), SR)
    assert np.max(np.abs(diff)) <= 1e-9
    assert time.perf_counter() - t0 < 5.0


def _sha(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@ac(10, "end-to-end qSeq: 20-note response, hash-identical over 3 runs, dump matches")
def test_ac10_end_to_end(tmp_path, beethoven_midi):
    hashes = set()
    for k in range(3):
        out = tmp_path / f"run{k}" / "response.mid"
        assert main(["qseq", str(beethoven_midi), "--notes", "20", "--out", str(out),
                     "--seed", "2021"]) == 0
        hashes.add((_sha(out), _sha(out.with_suffix(".analysis.json"))))
        assert len(read_midi(out)) == 20
    assert len(hashes) == 1
    dump = json.loads((tmp_path / "run0" / "response.analysis.json").read_text())
    f = dump["features"]
    assert [f[k]["reduced"] for k in ("pitch", "duration", "loudness")] == \
        [P_REDUCED, D_REDUCED, L_REDUCED]
    assert f["pitch"]["counts"] == P_COUNTS


def _exchange(address, lines):
    host, port = address.split(":")
    with socket.create_connection((host, int(port)), timeout=10) as s:
        f = s.makefile("rb")
        out = []
        for line in lines:
            s.sendall(line)
            out.append(json.loads(f.readline()))
    return out


@ac(11, "backend transparency: TCP runs bit-identical to local; 1,000 malformed lines survived")
def test_ac11_backend_transparency(tmp_path, beethoven_midi):
    t0 = time.perf_counter()
    server = start_server("127.0.0.1", 0)
    try:
        for backend, tag in (("local", "l"), (server.address, "r")):
            assert main(["qsyn", "--count", "4", "--out-dir", str(tmp_path / f"syn_{tag}"),
                         "--seed", "99", "--backend", backend]) == 0
            assert main(["qseq", str(beethoven_midi), "--notes", "20", "--seed", "99",
                         "--out", str(tmp_path / f"seq_{tag}.mid"), "--backend", backend]) == 0
        for name in ("sound_001.wav", "sound_002.wav", "sound_003.wav", "sound_004.wav",
                     "sequence.wav"):
            assert _sha(tmp_path / "syn_l" / name) == _sha(tmp_path / "syn_r" / name)
        assert _sha(tmp_path / "seq_l.mid") == _sha(tmp_path / "seq_r.mid")

        rng = random.Random(11)
        alphabet = b'{}[]":,0123456789abcdefghijklmnopqrstuvwxyz -.\x00\xff'
        lines = []
        for _ in range(1000):
            body = bytes(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
            lines.append(body.replace(b"\n", b" ") + b"\n")
        replies = _exchange(server.address, lines + [encode(CircuitRequest("health"))])
        assert len(replies) == 1001
        assert all(r["status"] == "error" for r in replies[:-1] if r.get("kind") != "health")
        assert replies[-1]["status"] == "ok"
        # the server still serves seeded sessions after the fuzz
        r = _exchange(server.address, [encode(CircuitRequest("hyperdie", "post", 1, 42))])[0]
        assert r["measurements"][0] == LocalBackend(seed=42).hyperdie(1)[0].tolist()
    finally:
        server.shutdown()
        server.server_close()
    assert time.perf_counter() - t0 < 30.0


@ac(12, "classical baseline: A3 -> B3, B3 -> C4, C3 successors 0.2 +/- 0.015")
def test_ac12_classical_baseline():
    table = c_major_rules()
    rng = make_rng(12)
    assert all(classical_generate(table, "A3", 1, rng) == ["B3"] for _ in range(100))
    assert all(classical_generate(table, "B3", 1, rng) == ["C4"] for _ in range(100))
    draws = [classical_generate(table, "C3", 1, rng)[0] for _ in range(10_000)]
    for s in ("C3", "D3", "E3", "G3", "C4"):
        assert abs(draws.count(s) / 10_000 - 0.2) <= 0.015
    assert set(draws) == {"C3", "D3", "E3", "G3", "C4"}
