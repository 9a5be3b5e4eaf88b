# %% [markdown]
# # From a tune to three transition gates
#
# Pitch, duration and loudness are modelled separately. Each feature keeps
# its first four distinct values, transitions are counted, the counts are
# balanced to a doubly stochastic matrix, and six Givens angles are fitted
# so that the squared entries of a 4x4 rotation approximate it.

# %%
from importlib import resources

import numpy as np

from qmuse.notation_io import read_notes
from qmuse.sequencer import analyze_notes, sinkhorn
from qmuse.sequencer.fitting import residual

np.set_printoptions(precision=4, suppress=True)
tune = read_notes(resources.files("qmuse") / "data" / "beethoven5_opening.txt")
print(len(tune), "notes at", tune.tempo, "BPM")

# %%
models = analyze_notes(tune.notes)
for m in models:
    print(m.feature, "alphabet", m.alphabet)
    print("  reduced", list(m.track.reduced))

# %%
pitch = models[0]
print("counts (row = current, column = next)")
print(pitch.counts)
print("balanced")
print(pitch.bistochastic)
print("row sums", pitch.bistochastic.sum(axis=1), "col sums", pitch.bistochastic.sum(axis=0))

# %% [markdown]
# Smoothing strength matters: a smaller epsilon keeps the matrix closer to
# the raw counts' structure, but sparse patterns take longer to balance.

# %%
for eps in (1e-1, 1e-3, 1e-6):
    res = sinkhorn(pitch.counts, epsilon=eps)
    print(f"eps={eps:g}: sweeps {res.iterations}, newton evals {res.newton_steps}, "
          f"diag {np.diag(res.matrix).round(3)}")

# %% [markdown]
# Not every doubly stochastic matrix is the entrywise square of an
# orthogonal one, so the fit reports its residual.

# %%
for m in models:
    print(f"{m.feature:9s} angles(deg) {np.degrees(m.angles).round(1)}  "
          f"residual {m.residual:.4f}  (theta=0: {residual(np.zeros(6), m.bistochastic):.4f})")

# %%
print("squared gate entries, pitch")
print(pitch.gate ** 2)
print("target")
print(pitch.bistochastic)
