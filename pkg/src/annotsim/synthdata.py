"""Bundled dataset builders for self-contained experiments.

The wine-style corpus is generated from a seeded latent-factor model:
eleven physico-chemical features driven by three latent factors, and an
ordinal quality label binned from a noisy latent score. The noise level
keeps desk-scale forest accuracy in the 50-70% band, so query
uncertainty stays informative. The breast-cancer table re-exports
scikit-learn's bundled copy of the Wisconsin diagnostic dataset.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

WINE_DEFAULT_ROWS = 1600
WINE_DEFAULT_SEED = 20240501

# feature -> (base level, z1 load, z2 load, z3 load, noise sd)
_WINE_FEATURES = {
    "fixed_acidity": (8.3, 1.4, 0.3, 0.0, 0.6),
    "volatile_acidity": (0.53, -0.10, 0.14, 0.02, 0.06),
    "citric_acid": (0.27, 0.12, -0.08, 0.03, 0.08),
    "residual_sugar": (2.5, 0.2, 0.1, 0.9, 0.7),
    "chlorides": (0.087, -0.01, 0.02, 0.005, 0.015),
    "free_sulfur_dioxide": (15.9, -1.5, 2.0, 4.5, 5.0),
    "total_sulfur_dioxide": (46.0, -6.0, 9.0, 14.0, 15.0),
    "density": (0.9967, 0.0006, 0.0004, -0.0009, 0.0008),
    "ph": (3.31, -0.08, 0.05, 0.01, 0.09),
    "sulphates": (0.66, 0.09, -0.05, 0.02, 0.10),
    "alcohol": (10.4, 0.55, -0.35, -0.75, 0.55),
}

# roughly the class balance of the red-wine quality table, grades 3..8
_WINE_QUALITY_SHARES = (0.04, 0.12, 0.34, 0.30, 0.14, 0.06)


def wine_like_frame(n_rows: int = WINE_DEFAULT_ROWS, seed: int = WINE_DEFAULT_SEED) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n_rows, 3))
    columns = {}
    for name, (base, a1, a2, a3, noise) in _WINE_FEATURES.items():
        columns[name] = base + a1 * z[:, 0] + a2 * z[:, 1] + a3 * z[:, 2] + rng.normal(
            scale=noise, size=n_rows
        )
    score = 1.1 * z[:, 0] - 0.7 * z[:, 1] + 0.5 * z[:, 2] + rng.normal(scale=1.1, size=n_rows)
    cut_points = np.quantile(score, np.cumsum(_WINE_QUALITY_SHARES)[:-1])
    columns["quality"] = np.digitize(score, cut_points) + 3
    return pd.DataFrame(columns)


def write_wine_like_csv(
    path, n_rows: int = WINE_DEFAULT_ROWS, seed: int = WINE_DEFAULT_SEED
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    wine_like_frame(n_rows, seed).to_csv(path, index=False)
    return path


def write_breast_cancer_csv(path) -> Path:
    from sklearn.datasets import load_breast_cancer

    raw = load_breast_cancer()
    frame = pd.DataFrame(raw.data, columns=[c.replace(" ", "_") for c in raw.feature_names])
    frame["diagnosis"] = [raw.target_names[t] for t in raw.target]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path
