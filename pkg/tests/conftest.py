from __future__ import annotations

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from adlkit.records import FeatureRecord
from adlkit.taxonomy import ACTIVITIES

BASE_TIME = datetime(2015, 6, 16, 15, 32, 5, tzinfo=timezone.utc)


def make_record(
    image_id: str,
    label_index: int | None = 0,
    features: dict[str, np.ndarray] | None = None,
    user_id: str = "u1",
    backbone: str = "alexnet",
    minute: int = 0,
) -> FeatureRecord:
    return FeatureRecord(
        image_id=image_id,
        user_id=user_id,
        timestamp=BASE_TIME + timedelta(minutes=minute),
        backbone=backbone,
        features=features if features is not None else {},
        label=ACTIVITIES[label_index] if label_index is not None else None,
    )


@pytest.fixture
def record_factory():
    return make_record
