"""Synthetic feature-record generator for tests and demos.

Not derived from any real capture: records are clustered Gaussians per
activity class. The logits carry a systematic confusion pattern (each
class also excites its successor), so probability vectors contain
recoverable structure beyond their argmax, and the fc-style layers carry
complementary cluster signal.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Sequence

import numpy as np

from .fusion import softmax
from .records import FeatureRecord
from .taxonomy import ACTIVITIES, N_ACTIVITIES

# Imbalanced class-weight profile used when only a record total is given.
DEFAULT_CLASS_WEIGHTS: tuple[float, ...] = (
    0.069, 0.024, 0.045, 0.038, 0.012, 0.030, 0.037, 0.058, 0.026, 0.053,
    0.065, 0.036, 0.070, 0.031, 0.148, 0.024, 0.061, 0.069, 0.041, 0.040,
    0.023,
)

_BASE_TIME = datetime(2015, 3, 2, 10, 0, 0, tzinfo=timezone.utc)


def clustered_matrix(
    counts: Sequence[int],
    dim: int,
    spread: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class unit-Gaussian centers plus isotropic noise of sd ``spread``."""
    centers = rng.normal(0.0, 1.0, size=(len(counts), dim))
    total = int(sum(counts))
    X = np.empty((total, dim), dtype=np.float32)
    y = np.empty(total, dtype=np.int64)
    row = 0
    for c, count in enumerate(counts):
        X[row : row + count] = centers[c] + rng.normal(0.0, spread, size=(count, dim))
        y[row : row + count] = c
        row += count
    return X, y


def generate_records(
    counts: Sequence[int],
    *,
    seed: int,
    feature_seed: int | None = None,
    backbone: str = "synthnet",
    fc_dim: int = 4096,
    pool_dim: int = 1024,
    cluster_spread: float = 0.5,
    logit_signal: float = 2.2,
    logit_confusion: float = 1.6,
    logit_noise: float = 0.6,
    users: Sequence[str] = ("u1", "u2", "u3"),
) -> list[FeatureRecord]:
    """Generate labeled records with fc6, pool5_7x7, logits, and prob layers.

    ``counts`` gives the number of records per activity class (21 entries).
    ``cluster_spread`` controls fc-space overlap; ``logit_noise`` controls
    how often the probability argmax misses the true class. ``seed`` fixes
    the image identities (ids, labels, timestamps); ``feature_seed``
    (default: same as seed) fixes the feature draw, so two backbones can
    describe the same image set with independent features.
    """
    if len(counts) != N_ACTIVITIES:
        raise ValueError(f"expected {N_ACTIVITIES} class counts, got {len(counts)}")
    identity_rng = np.random.default_rng(np.random.SeedSequence((0x5E17, seed)))
    feature_rng = np.random.default_rng(
        np.random.SeedSequence((0xFEA7, feature_seed if feature_seed is not None else seed))
    )
    fc_X, y = clustered_matrix(counts, fc_dim, cluster_spread, feature_rng)
    pool_X, _ = clustered_matrix(counts, pool_dim, cluster_spread, feature_rng)

    signatures = np.zeros((N_ACTIVITIES, N_ACTIVITIES))
    for c in range(N_ACTIVITIES):
        signatures[c, c] = logit_signal
        signatures[c, (c + 1) % N_ACTIVITIES] = logit_confusion
    logits = signatures[y] + feature_rng.normal(0.0, logit_noise, size=(y.size, N_ACTIVITIES))

    # Interleave classes so consecutive records do not share a label.
    order = identity_rng.permutation(y.size)
    records = []
    for i, row in enumerate(order):
        lg = logits[row].astype(np.float32)
        records.append(
            FeatureRecord(
                image_id=f"img-{seed}-{i:06d}",
                user_id=users[i % len(users)],
                timestamp=_BASE_TIME + timedelta(seconds=30 * i),
                backbone=backbone,
                features={
                    "fc6": fc_X[row],
                    "pool5_7x7": pool_X[row],
                    "logits": lg,
                    "prob": softmax(lg).astype(np.float32),
                },
                label=ACTIVITIES[int(y[row])],
            )
        )
    return records
