import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmuse.notation_io import (MidiError, NoteList, NoteParseError, encode_vlq, format_text,
                               midi_bytes, parse_text, read_midi, read_notes, read_text,
                               write_midi, write_text)
from qmuse.qcsim import make_rng
from qmuse.sequencer import NoteEvent, analyze_notes, default_vocabulary, generate_sequence

from .conftest import BEETHOVEN_D, BEETHOVEN_L, BEETHOVEN_P

notes_st = st.lists(st.builds(NoteEvent, st.integers(0, 127), st.integers(1, 5000),
                              st.integers(1, 127)), max_size=30)


def smf(*tracks, fmt=None, division=480):
    fmt = (0 if len(tracks) == 1 else 1) if fmt is None else fmt
    out = b"MThd" + struct.pack(">IHHH", 6, fmt, len(tracks), division)
    for t in tracks:
        out += b"MTrk" + struct.pack(">I", len(t)) + t
    return out


EOT = b"\x00\xff\x2f\x00"


class TestMidiRead:
    def test_fixture_gives_feature_lists(self, beethoven_midi):
        nl = read_midi(beethoven_midi)
        assert [n.pitch for n in nl] == BEETHOVEN_P
        assert [n.duration for n in nl] == BEETHOVEN_D
        assert [n.loudness for n in nl] == BEETHOVEN_L
        assert nl.tempo == 120.0

    def test_empty_track(self, tmp_path):
        path = tmp_path / "e.mid"
        path.write_bytes(smf(EOT))
        assert len(read_midi(path)) == 0

    def test_overlap_truncates_first_note(self, tmp_path):
        # 480 tpq, default 120 BPM: 1 tick = 1.0417 ms
        track = (b"\x00\x90\x3c\x64"          # C4 on at 0
                 b"\x83\x60\x90\x40\x50"      # E4 on at 480 while C4 sounds
                 b"\x83\x60\x80\x3c\x40"      # C4 off at 960 (ignored, already cut)
                 b"\x83\x60\x80\x40\x40" + EOT)  # E4 off at 1440
        path = tmp_path / "o.mid"
        path.write_bytes(smf(track))
        notes = read_midi(path).notes
        assert [(n.pitch, n.duration, n.loudness) for n in notes] == [(60, 500, 100), (64, 1000, 80)]

    def test_running_status_and_zero_velocity_off(self, tmp_path):
        track = (b"\x00\x90\x3c\x64" b"\x83\x60\x3c\x00"   # on, then running-status off
                 b"\x00\x3e\x50" b"\x83\x60\x3e\x00" + EOT)
        path = tmp_path / "r.mid"
        path.write_bytes(smf(track))
        assert [(n.pitch, n.duration) for n in read_midi(path)] == [(60, 500), (62, 500)]

    def test_running_status_violation(self, tmp_path):
        path = tmp_path / "bad.mid"
        path.write_bytes(smf(b"\x00\x3c\x64" + EOT))
        with pytest.raises(MidiError, match="running status"):
            read_midi(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.mid"
        path.write_bytes(b"MThd\x00\x00\x00\x06\x00\x02\x00\x01\x01\xe0")
        with pytest.raises(MidiError, match="format 2"):
            read_midi(path)
        path.write_bytes(b"MThd\x00\x00")
        with pytest.raises(MidiError):
            read_midi(path)

    def test_truncated_chunk(self, tmp_path):
        path = tmp_path / "t.mid"
        path.write_bytes(smf(EOT)[:-2])
        with pytest.raises(MidiError):
            read_midi(path)

    def test_unreleased_note_is_dropped(self, tmp_path, caplog):
        path = tmp_path / "u.mid"
        path.write_bytes(smf(b"\x00\x90\x3c\x64" + EOT))
        assert len(read_midi(path)) == 0
        assert "never released" in caplog.text

    def test_tempo_map_and_format1(self, tmp_path):
        # tempo track: 120 BPM then 60 BPM from tick 480
        tempo = b"\x00\xff\x51\x03\x07\xa1\x20" b"\x83\x60\xff\x51\x03\x0f\x42\x40" + EOT
        notes = b"\x00\x90\x3c\x64" b"\x87\x40\x80\x3c\x40" + EOT  # 960 ticks
        path = tmp_path / "f1.mid"
        path.write_bytes(smf(tempo, notes))
        (n,) = read_midi(path).notes
        assert n.duration == 500 + 1000

    def test_smpte_division(self, tmp_path):
        path = tmp_path / "s.mid"
        # 25 fps, 40 ticks per frame -> 1 tick = 1 ms
        path.write_bytes(smf(b"\x00\x90\x3c\x64\x83\x60\x80\x3c\x40" + EOT, division=0xE728))
        assert read_midi(path).notes[0].duration == 480

    def test_non_note_events_skipped(self, tmp_path):
        track = (b"\x00\xb0\x07\x64" b"\x00\xc0\x05" b"\x00\xf0\x02\x01\xf7"
                 b"\x00\xff\x03\x02hi" b"\x00\x90\x3c\x64\x83\x60\x80\x3c\x40" + EOT)
        path = tmp_path / "k.mid"
        path.write_bytes(smf(track))
        assert len(read_midi(path)) == 1


class TestMidiWrite:
    def test_empty_list_is_end_of_track_only(self):
        data = midi_bytes(NoteList([], 120.0))
        assert data[:14] == b"MThd" + struct.pack(">IHHH", 6, 0, 1, 480)
        assert data[14:] == b"MTrk" + struct.pack(">I", 4) + EOT

    def test_vlq(self):
        assert encode_vlq(0) == b"\x00"
        assert encode_vlq(0x7F) == b"\x7f"
        assert encode_vlq(0x80) == b"\x81\x00"
        assert encode_vlq(0x0FFFFFFF) == b"\xff\xff\xff\x7f"
        with pytest.raises(MidiError):
            encode_vlq(0x10000000)

    @given(notes_st, st.sampled_from([60.0, 90.0, 120.0, 150.0]))
    def test_roundtrip_within_one_tick(self, tmp_path_factory, notes, tempo):
        path = tmp_path_factory.mktemp("rt") / "x.mid"
        write_midi(NoteList(notes, tempo), path)
        back = read_midi(path)
        tick_ms = 60_000.0 / tempo / 480
        assert [(n.pitch, n.loudness) for n in back] == [(n.pitch, n.loudness) for n in notes]
        assert all(abs(a.duration - b.duration) <= tick_ms + 0.5 for a, b in zip(back, notes))

    def test_seeded_response_loads(self, tmp_path, beethoven_notes):
        models = analyze_notes(beethoven_notes, restarts=4)
        notes = generate_sequence(models, default_vocabulary(), 20, make_rng(15))
        path = tmp_path / "resp.mid"
        write_midi(NoteList(notes, 120.0), path)
        assert read_midi(path).notes == notes


class TestText:
    def test_single_line(self):
        assert parse_text("60 500 100\n").notes == [NoteEvent(60, 500, 100)]

    def test_comments_and_tempo(self):
        nl = parse_text("# tempo = 90\n\n# a comment\n60 500 100  # trailing\n")
        assert nl.tempo == 90.0 and len(nl) == 1

    def test_beethoven_roundtrip(self, beethoven_text, beethoven_notes):
        assert read_text(beethoven_text).notes == beethoven_notes
        assert read_notes(beethoven_text).notes == beethoven_notes

    @given(notes_st)
    def test_roundtrip_identity(self, notes):
        nl = NoteList(notes, 100.0)
        back = parse_text(format_text(nl))
        assert back.notes == notes and back.tempo == 100.0

    @pytest.mark.parametrize("text, line", [("60 500\n", 1), ("60 500 100\nx y z\n", 2),
                                            ("\n\n60 0 100\n", 3), ("# tempo = -4\n", 1)])
    def test_parse_errors_cite_line(self, text, line):
        with pytest.raises(NoteParseError) as exc:
            parse_text(text, "in.txt")
        assert exc.value.line_no == line and f"in.txt:{line}:" in str(exc.value)

    def test_write_text_file(self, tmp_path):
        path = tmp_path / "n.txt"
        write_text(NoteList([NoteEvent(1, 2, 3)]), path)
        assert "1 2 3" in path.read_text()
