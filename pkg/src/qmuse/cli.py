"""
Command-line entry points.

    qmuse qsyn    --count 4 --out-dir sounds/ --seed 7
    qmuse qseq    tune.mid --notes 20 --out response.mid --seed 7
    qmuse analyze tune.mid
    qmuse serve   --port 7777

Exit codes: 0 success, 1 usage, 2 input/parse, 3 backend, 4 internal.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
from pathlib import Path

from . import __version__
from .backend import BackendError, make_backend
from .backend.server import CircuitServer
from .hyperdie import BankError, build_patch, default_bank, load_bank, patch_parameters
from .notation_io import MidiError, NoteList, NoteParseError, read_notes, write_midi
from .qcsim import RNG_ALGORITHM
from .sequencer import analyze_notes, decode_note, generate_records
from .sequencer.analysis import analysis_dump
from .sequencer.balance import BalanceError
from .sequencer.fitting import DEFAULT_FIT_SEED, DEFAULT_RESTARTS
from .sequencer.generate import note_codes
from .sequencer.model import VocabularyError, default_vocabulary, load_vocabulary
from .synth import DEFAULT_SAMPLE_RATE, ClipError, render, render_sequence, write_wav

DEFAULT_GAIN = 0.625

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_BACKEND, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("qmuse")

_INPUT_ERRORS = (BankError, VocabularyError, MidiError, NoteParseError, ClipError,
                 BalanceError, OSError, ValueError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_seed(seed: int | None) -> int:
    """Explicit flag, then QMUSE_SEED, then a fresh random seed (recorded in the manifest)."""
    if seed is None:
        env = os.environ.get("QMUSE_SEED")
        if env:
            try:
                seed = int(env)
            except ValueError:
                raise UsageError(f"QMUSE_SEED must be an integer, got {env!r}") from None
    if seed is None or seed == 0:
        seed = int.from_bytes(os.urandom(8), "little") >> 1 or 1
    if seed < 0:
        raise UsageError("seed must be non-negative")
    return seed


def _write_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_qsyn(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    bank = load_bank(args.bank) if args.bank else default_bank()
    seed = resolve_seed(args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    backend = make_backend(args.backend, seed=seed)
    invocations, patches = [], []
    try:
        for k in range(args.count):
            (c,) = backend.hyperdie(1)
            (d,) = backend.hyperdie(1)
            invocations += [{"sound": k + 1, "role": "C", "bits": c.tolist()},
                            {"sound": k + 1, "role": "D", "bits": d.tolist()}]
            patches.append(build_patch(c, d, bank))
    finally:
        backend.close()
    for k, patch in enumerate(patches, 1):
        write_wav(render(patch, args.sample_rate, args.gain), out / f"sound_{k:03d}.wav")
    write_wav(render_sequence(patches, args.sample_rate, args.gain), out / "sequence.wav")
    _write_json({
        "command": "qsyn",
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "backend": "local" if args.backend == "local" else "remote",
        "sample_rate": args.sample_rate,
        "gain": args.gain,
        "die_invocations": invocations,
        "patches": [patch_parameters(p) for p in patches],
    }, out / "manifest.json")
    log.info("wrote %d sounds to %s", args.count, out)
    return EXIT_OK


def _analyze(args):
    notes = read_notes(args.input)
    if not notes.notes:
        raise ValueError(f"{args.input}: no notes found")
    models = analyze_notes(notes.notes, epsilon=args.epsilon, restarts=args.restarts,
                           seed=args.fit_seed)
    return models, analysis_dump(models, args.epsilon, args.restarts, args.fit_seed)


def cmd_analyze(args) -> int:
    _, dump = _analyze(args)
    text = json.dumps(dump, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_qseq(args) -> int:
    if args.notes < 1:
        raise UsageError("--notes must be at least 1")
    vocab = load_vocabulary(args.vocab) if args.vocab else default_vocabulary()
    seed = resolve_seed(args.seed)
    models, dump = _analyze(args)
    backend = make_backend(args.backend, seed=seed)
    try:
        records = generate_records(models, args.notes, backend=backend, arming=args.arming)
    finally:
        backend.close()
    notes = [decode_note(c, vocab) for c in records]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_midi(NoteList(notes, vocab.tempo), out)
    _write_json(dump, Path(args.dump) if args.dump else out.with_suffix(".analysis.json"))
    _write_json({
        "command": "qseq",
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "backend": "local" if args.backend == "local" else "remote",
        "arming": args.arming,
        "rounds": [{"bits": c.tolist(), "codes": note_codes(c),
                    "note": [n.pitch, n.duration, n.loudness]}
                   for c, n in zip(records, notes)],
        "vocabulary": {"pitch_sets": [list(s) for s in vocab.pitch_sets],
                       "durations": list(vocab.durations), "tempo": vocab.tempo,
                       "velocity": vocab.velocity},
    }, out.with_suffix(".manifest.json"))
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        server = CircuitServer((args.bind, args.port))
    except OSError as exc:
        print(f"qmuse serve: cannot bind {args.bind}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    server.sessions.ignore_seeds = args.seed_policy == "entropy"

    def stop(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, stop)
    print(f"qmuse serve: listening on {server.address}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _add_analysis_flags(p):
    p.add_argument("input", help="MIDI (.mid) or text note list")
    p.add_argument("--epsilon", type=float, default=1e-3, help="count smoothing before balancing")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    p.add_argument("--fit-seed", type=int, default=DEFAULT_FIT_SEED)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmuse", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qsyn", help="synthesize sounds from hyper-die rolls")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--bank", help="TOML parameter bank (default: built-in)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--backend", default="local", help="'local' or host:port")
    p.add_argument("--seed", type=int)
    p.add_argument("--sample-rate", type=int, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--gain", type=float, default=DEFAULT_GAIN,
                   help="output scale (default 0.625 = 1/1.6, the built-in bank's worst-case amplitude sum)")
    p.set_defaults(func=cmd_qsyn)

    p = sub.add_parser("qseq", help="generate a note response to a tune")
    _add_analysis_flags(p)
    p.add_argument("--notes", type=int, default=20)
    p.add_argument("--out", required=True, help="output MIDI path")
    p.add_argument("--dump", help="analysis dump path (default: <out>.analysis.json)")
    p.add_argument("--vocab", help="TOML vocabulary (default: built-in)")
    p.add_argument("--backend", default="local")
    p.add_argument("--seed", type=int)
    p.add_argument("--arming", choices=("swapped", "direct"), default="swapped")
    p.set_defaults(func=cmd_qseq)

    p = sub.add_parser("analyze", help="write the analysis dump only")
    _add_analysis_flags(p)
    p.add_argument("--out", help="dump path (default: stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the circuit server")
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7777)
    p.add_argument("--seed-policy", choices=("request", "entropy"), default="request",
                   help="honor request seeds, or always seed sessions from entropy")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qmuse: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as exc:
        print(f"qmuse: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except _INPUT_ERRORS as exc:
        print(f"qmuse: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"qmuse: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
