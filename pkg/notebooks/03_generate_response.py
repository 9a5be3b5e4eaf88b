# %% [markdown]
# # Generating a response, locally and through the circuit server
#
# Each round runs three 2-qubit registers (pitch, duration, loudness gates).
# The first round starts from H x H; later rounds are armed with the previous
# measurement. Six bits per round decode to one note.

# %%
from importlib import resources
from pathlib import Path

import numpy as np

from qmuse.backend import LocalBackend, RemoteBackend, start_server
from qmuse.notation_io import NoteList, read_notes, write_midi
from qmuse.qcsim import make_rng
from qmuse.sequencer import analyze_notes, decode_note, default_vocabulary, generate_records
from qmuse.sequencer.generate import note_codes

tune = read_notes(resources.files("qmuse") / "data" / "beethoven5_opening.txt")
models = analyze_notes(tune.notes)
vocab = default_vocabulary()

# %%
records = generate_records(models, 20, rng=make_rng(2021))
notes = [decode_note(c, vocab) for c in records]
for c, n in list(zip(records, notes))[:6]:
    print(c.tolist(), note_codes(c), (n.pitch, n.duration))

# %%
write_midi(NoteList(notes, vocab.tempo), Path("response.mid"))

# %% [markdown]
# Armed rounds are a Markov chain: given armed basis state j, outcome i has
# probability U[i, j]**2. Compare with frequencies from many rounds.

# %%
u = models[0].gate
many = generate_records(models, 5000, rng=make_rng(5), arming="direct")
pairs = [(2 * a.bits[0] + a.bits[1], 2 * b.bits[0] + b.bits[1]) for a, b in zip(many, many[1:])]
table = np.zeros((4, 4))
for j, i in pairs:
    table[i, j] += 1
with np.errstate(invalid="ignore"):
    print(np.round(table / table.sum(axis=0), 3))
print(np.round(u ** 2, 3))

# %% [markdown]
# The same session seed through the TCP server gives the same records.

# %%
server = start_server("127.0.0.1", 0)
remote = RemoteBackend(server.address, seed=2021)
try:
    remote_records = generate_records(models, 20, backend=remote)
finally:
    remote.close()
    server.shutdown()
    server.server_close()
local_records = generate_records(models, 20, backend=LocalBackend(seed=2021))
print("identical:", [r.tolist() for r in remote_records] == [r.tolist() for r in local_records])
