"""Synthetic dataset builders shared by model and acceptance tests."""

import numpy as np

from adscreen.corpus import Dataset, FeatureTable


def as_dataset(X, y01, prefix="f"):
    X = np.asarray(X, dtype=float)
    table = FeatureTable(
        ids=tuple(f"S{i:04d}" for i in range(len(X))),
        column_names=tuple(f"{prefix}{j}" for j in range(X.shape[1])),
        values=X,
    )
    labels = tuple("ad" if v else "cn" for v in y01)
    return Dataset(table=table, labels=labels)


def separable_blobs(n=200, margin=2.0, seed=0):
    """Two 2-D gaussian clouds whose centers are 2*margin apart per axis."""
    rng = np.random.default_rng(seed)
    half = n // 2
    neg = rng.normal(loc=(-margin, -margin), scale=0.5, size=(half, 2))
    pos = rng.normal(loc=(margin, margin), scale=0.5, size=(n - half, 2))
    X = np.vstack([neg, pos])
    y = np.array([0] * half + [1] * (n - half))
    perm = rng.permutation(n)
    return X[perm], y[perm]


def concentric_circles(n=200, r_inner=2.8, r_outer=3.6, noise=0.08, seed=0):
    rng = np.random.default_rng(seed)
    half = n // 2
    angles = rng.uniform(0, 2 * np.pi, size=n)
    radii = np.concatenate(
        [
            rng.normal(r_inner, noise, size=half),
            rng.normal(r_outer, noise, size=n - half),
        ]
    )
    X = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    y = np.array([0] * half + [1] * (n - half))
    perm = rng.permutation(n)
    return X[perm], y[perm]


def xor_points(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1.0, 1.0, size=(n, 2))
    # keep labels balanced-ish and unambiguous by resampling near-axis points
    for i in range(n):
        while abs(X[i, 0] * X[i, 1]) < 0.01:
            X[i] = rng.uniform(-1.0, 1.0, size=2)
    y = (X[:, 0] * X[:, 1] > 0).astype(int)
    return X, y


def accuracy(pred_labels, y01):
    hits = sum(
        1 for p, t in zip(pred_labels, y01) if (p == "ad") == bool(t)
    )
    return hits / len(y01)
