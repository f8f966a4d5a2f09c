"""Per-minute location estimation from hub RSSI observations.

For each minute of a shift: observations with RSSI below the floor (150)
are dropped as too noisy; if none survive the slot is OutsideUnit, otherwise
the slot takes the category of the hub with the highest surviving RSSI.
Lounge and medicine-room hubs both map to the merged LoungeMed category.

Ties across categories resolve by LocationCategory order
(PatientRoom < NursingStation < LoungeMed), which keeps timelines
deterministic; ties within one category are immaterial.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import OutOfRange
from .model import (
    HUB_TO_LOCATION,
    SHIFT_MINUTES,
    HubRecord,
    LocationCategory,
    RssiObservation,
)

RSSI_FLOOR = 150  # keep rssi >= 150, drop below


@dataclass
class LocationTimeline:
    """720 per-minute location categories for one (participant, shift_date)."""

    participant_id: str
    shift_date: date
    slots: np.ndarray  # uint8 LocationCategory values, length 720

    def __post_init__(self) -> None:
        if len(self.slots) != SHIFT_MINUTES:
            raise ValueError(f"timeline must have {SHIFT_MINUTES} slots")

    def category(self, minute_index: int) -> LocationCategory:
        return LocationCategory(int(self.slots[minute_index]))


def empty_timeline(participant_id: str, shift_date: date) -> LocationTimeline:
    slots = np.full(SHIFT_MINUTES, int(LocationCategory.OUTSIDE_UNIT), dtype=np.uint8)
    return LocationTimeline(participant_id, shift_date, slots)


def estimate_timeline(
    rssi_for_shift: list[RssiObservation],
    hubs: dict[str, HubRecord],
    rssi_floor: int = RSSI_FLOOR,
) -> LocationTimeline:
    """Build the per-minute timeline for one (participant, shift_date).

    All observations must share one participant and shift date and reference
    known hubs. An empty observation list yields an all-OutsideUnit timeline
    only when identity is supplied via a non-empty list; callers with zero
    observations should use empty_timeline directly.
    """
    if not rssi_for_shift:
        raise ValueError("estimate_timeline needs at least one observation; use empty_timeline otherwise")
    first = rssi_for_shift[0]
    timeline = empty_timeline(first.participant_id, first.shift_date)
    best_rssi = np.full(SHIFT_MINUTES, -1, dtype=np.int16)
    for obs in rssi_for_shift:
        if obs.participant_id != first.participant_id or obs.shift_date != first.shift_date:
            raise ValueError("observations span more than one (participant, shift_date)")
        if not 0 <= obs.minute_index < SHIFT_MINUTES:
            continue
        if obs.rssi < rssi_floor:
            continue
        cat = HUB_TO_LOCATION[hubs[obs.hub_id].location_category]
        m = obs.minute_index
        # strict > keeps the first-seen hub on equal rssi; the category
        # tie-break below only engages when the stronger category differs
        if obs.rssi > best_rssi[m] or (obs.rssi == best_rssi[m] and int(cat) < int(timeline.slots[m])):
            best_rssi[m] = obs.rssi
            timeline.slots[m] = int(cat)
    return timeline


def location_of(timeline: LocationTimeline, minute_index: int) -> LocationCategory:
    """Slot lookup with range checking."""
    if not 0 <= minute_index < SHIFT_MINUTES:
        raise OutOfRange(f"minute_index {minute_index} outside [0, {SHIFT_MINUTES})")
    return timeline.category(minute_index)
