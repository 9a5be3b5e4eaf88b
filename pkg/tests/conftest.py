import numpy as np
import pytest

from qmuse.notation_io import NoteList, write_midi
from qmuse.qcsim import MeasurementRecord
from qmuse.sequencer import NoteEvent

# Opening of Beethoven's 5th as extracted features (pitch, duration ms, velocity)
BEETHOVEN_P = [67, 67, 67, 63, 65, 65, 65, 62, 67, 67, 67, 63, 68, 68, 68, 67, 75, 75, 75, 72]
BEETHOVEN_D = [298, 301, 302, 1798, 302, 297, 301, 1799, 302, 303, 296, 302, 297, 302, 298,
               301, 297, 301, 297, 1799]
BEETHOVEN_L = [113, 113, 113, 105, 113, 113, 113, 107, 61, 61, 61, 57, 64, 63, 63, 61, 70, 68,
               67, 60]

P_REDUCED = [67, 67, 67, 63, 65, 65, 65, 62, 67, 67, 67, 63, 67]
D_REDUCED = [298, 301, 302, 1798, 302, 301, 302, 302, 302, 298, 301, 301]
L_REDUCED = [113, 113, 113, 105, 113, 113, 113, 107, 61, 61, 61, 61]

P_COUNTS = [[4, 2, 0, 0], [1, 0, 1, 0], [0, 0, 2, 1], [1, 0, 0, 0]]

# four hyper-die record pairs (frequency rolls C, amplitude rolls D)
EXAMPLE_C = [[0, 0, 0, 0, 0, 1, 0, 0, 1], [0, 1, 1, 1, 1, 1, 0, 1, 0],
           [0, 0, 1, 0, 1, 1, 1, 1, 1], [1, 1, 1, 0, 1, 0, 0, 1, 1]]
EXAMPLE_D = [[0, 0, 1, 0, 1, 1, 0, 0, 0], [1, 0, 1, 0, 1, 1, 1, 1, 0],
           [1, 1, 0, 1, 1, 1, 0, 0, 0], [0, 0, 1, 1, 1, 0, 1, 0, 0]]

# 500 ticks per quarter at 120 BPM makes one tick exactly one millisecond
FIXTURE_TPQ = 500


@pytest.fixture
def beethoven_notes():
    return [NoteEvent(p, d, v) for p, d, v in zip(BEETHOVEN_P, BEETHOVEN_D, BEETHOVEN_L)]


@pytest.fixture
def beethoven_midi(tmp_path, beethoven_notes):
    path = tmp_path / "beethoven5.mid"
    write_midi(NoteList(beethoven_notes, 120.0), path, ticks_per_quarter=FIXTURE_TPQ)
    return path


@pytest.fixture
def beethoven_text(tmp_path, beethoven_notes):
    from qmuse.notation_io import write_text
    path = tmp_path / "beethoven5.txt"
    write_text(NoteList(beethoven_notes, 120.0), path)
    return path


@pytest.fixture
def example_records():
    return ([MeasurementRecord(c) for c in EXAMPLE_C], [MeasurementRecord(d) for d in EXAMPLE_D])


def random_unit_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


# one summary line per acceptance criterion, collected from @pytest.mark.acceptance(n, title)
_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    n, title = marker.args
    if rep.when == "call" or rep.failed:
        if _ACCEPTANCE.get(n, (None, "passed"))[1] == "passed":
            _ACCEPTANCE[n] = (title, "passed" if rep.passed else "failed")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  AC{n:02d}  {title}")
