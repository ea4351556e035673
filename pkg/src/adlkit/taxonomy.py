"""The closed 21-class taxonomy of daily activities.

Label names and their indices are fixed; every other module resolves
activity names through this one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)


class TaxonomyError(ValueError):
    """An activity name or index outside the 21-class taxonomy."""


CANONICAL_NAMES: tuple[str, ...] = (
    "Public Transport",
    "Driving",
    "Walking outdoor",
    "Walking indoor",
    "Biking",
    "Drinking together",
    "Drinking/eating alone",
    "Eating together",
    "Socializing",
    "Attending a seminar",
    "Meeting",
    "Reading",
    "TV",
    "Cleaning and chores",
    "Working",
    "Cooking",
    "Shopping",
    "Talking",
    "Resting",
    "Mobile",
    "Plane",
)

N_ACTIVITIES = len(CANONICAL_NAMES)


@dataclass(frozen=True)
class ActivityLabel:
    """One activity class: canonical name plus its fixed index."""

    name: str
    index: int

    def __str__(self) -> str:
        return self.name


ACTIVITIES: tuple[ActivityLabel, ...] = tuple(
    ActivityLabel(name, i) for i, name in enumerate(CANONICAL_NAMES)
)

_BY_NAME = {label.name: label for label in ACTIVITIES}
_BY_FOLDED = {label.name.casefold(): label for label in ACTIVITIES}


def label_from_index(index: int) -> ActivityLabel:
    """Return the activity at ``index``, raising TaxonomyError when out of range."""
    if not 0 <= index < N_ACTIVITIES:
        raise TaxonomyError(f"activity index {index} outside 0..{N_ACTIVITIES - 1}")
    return ACTIVITIES[index]


def label_from_name(name: str, *, normalize: bool = True) -> ActivityLabel:
    """Resolve an activity name to its label.

    Matching is case-sensitive against the canonical names. With
    ``normalize`` (the default), common case variants such as
    "Public transport" are accepted and logged as a warning.
    """
    label = _BY_NAME.get(name)
    if label is not None:
        return label
    if normalize:
        folded = _BY_FOLDED.get(name.strip().casefold())
        if folded is not None:
            logger.warning("normalized activity name %r to %r", name, folded.name)
            return folded
    raise TaxonomyError(f"unknown activity name: {name!r}")
