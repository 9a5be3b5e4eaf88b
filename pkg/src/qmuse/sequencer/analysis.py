"""Full tune analysis: features -> reduced alphabets -> counts -> bistochastic -> angles."""
from __future__ import annotations

import numpy as np

from .features import extract_features
from .fitting import DEFAULT_FIT_SEED, DEFAULT_RESTARTS
from .model import TransitionModel, fit_model

FEATURES = ("pitch", "duration", "loudness")


def analyze_notes(notes, epsilon: float = 1e-3, restarts: int = DEFAULT_RESTARTS,
                  seed: int = DEFAULT_FIT_SEED) -> list[TransitionModel]:
    """Models in register order: pitch, duration, loudness."""
    raws = extract_features(notes)
    return [fit_model(name, raw, epsilon=epsilon, restarts=restarts, seed=seed)
            for name, raw in zip(FEATURES, raws)]


def _matrix(m: np.ndarray) -> list[list]:
    return [[x.item() for x in row] for row in np.asarray(m)]


def model_report(m: TransitionModel) -> dict:
    report = {
        "raw": list(m.track.raw),
        "alphabet": list(m.alphabet),
        "reduced": list(m.track.reduced),
        "counts": _matrix(m.counts),
        "padded": m.padded,
        "bistochastic": _matrix(m.bistochastic),
        "sinkhorn_iterations": m.balance_iterations,
        "sinkhorn_tolerance": m.balance_tol,
        "newton_steps": m.balance_newton_steps,
        "angles_rad": [float(a) for a in m.angles],
        "angles_deg": [float(np.degrees(a)) for a in m.angles],
        "gate": _matrix(m.gate),
        "residual": m.residual,
    }
    if m.padded:
        missing = 4 - len(m.alphabet)
        report["padding"] = (
            f"alphabet has {len(m.alphabet)} symbol(s); {missing} missing symbol(s) "
            f"given a self-transition count of 1; decoded indices past the alphabet "
            f"map to {m.alphabet[-1]}"
        )
    return report


def analysis_dump(models, epsilon: float, restarts: int, seed: int) -> dict:
    """JSON-ready analysis report; register order is pitch, duration, loudness."""
    return {
        "format": "qmuse-analysis",
        "version": 1,
        "settings": {"epsilon": epsilon, "restarts": restarts, "fit_seed": seed},
        "register_order": [m.feature for m in models],
        "features": {m.feature: model_report(m) for m in models},
        "angles_rad": [float(a) for m in models for a in m.angles],
        "angles_deg": [float(np.degrees(a)) for m in models for a in m.angles],
    }
