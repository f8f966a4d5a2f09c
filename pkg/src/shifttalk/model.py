"""Core domain types shared across the pipeline.

Time is modeled as (shift_date, minute_index since shift start); minute 0 is
the start of the 12-hour shift regardless of whether it is a day or night
schedule, so the analytic code never touches wall clocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from enum import Enum, IntEnum

import numpy as np

SHIFT_MINUTES = 720  # 12-hour shift at one-minute resolution
RSSI_MIN = 136
RSSI_MAX = 193


class ShiftType(str, Enum):
    DAY = "day"
    NIGHT = "night"


class UnitType(str, Enum):
    ICU = "icu"
    NON_ICU = "non_icu"


class HubCategory(str, Enum):
    """Room category a Bluetooth hub is installed in."""

    NURSING_STATION = "ns"
    PATIENT_ROOM = "pat"
    LOUNGE = "lounge"
    MEDICINE_ROOM = "med"


class LocationCategory(IntEnum):
    """Per-minute location estimate.

    Integer order doubles as the tie-break precedence when two hubs report
    the same maximal RSSI in a minute (lower value wins).
    """

    PATIENT_ROOM = 0
    NURSING_STATION = 1
    LOUNGE_MED = 2
    OUTSIDE_UNIT = 3

    @property
    def code(self) -> str:
        return _LOCATION_CODES[self]


_LOCATION_CODES = {
    LocationCategory.PATIENT_ROOM: "pat",
    LocationCategory.NURSING_STATION: "ns",
    LocationCategory.LOUNGE_MED: "lounge_med",
    LocationCategory.OUTSIDE_UNIT: "outside",
}

HUB_TO_LOCATION = {
    HubCategory.NURSING_STATION: LocationCategory.NURSING_STATION,
    HubCategory.PATIENT_ROOM: LocationCategory.PATIENT_ROOM,
    HubCategory.LOUNGE: LocationCategory.LOUNGE_MED,
    HubCategory.MEDICINE_ROOM: LocationCategory.LOUNGE_MED,
}


@dataclass(frozen=True)
class ParticipantProfile:
    participant_id: str
    shift_type: ShiftType
    unit_type: UnitType
    pos_affect: int  # 10-item sum, 10..50
    neg_affect: int  # 10-item sum, 10..50
    life_satisfaction: float  # 5-item average, 1..7


@dataclass(frozen=True)
class HubRecord:
    hub_id: str
    location_category: HubCategory


@dataclass(frozen=True)
class RssiObservation:
    participant_id: str
    shift_date: date
    minute_index: int
    hub_id: str
    rssi: int  # clamped to [RSSI_MIN, RSSI_MAX] at parse time


@dataclass(frozen=True)
class DailyPhysiology:
    participant_id: str
    shift_date: date
    walk_ratio: float  # in [0, 1]
    sleep_hours: float  # in [0, 24]


@dataclass(frozen=True)
class FeatureFrame:
    """One ~10 ms acoustic observation inside a recording.

    ``log_pitch`` is NaN for unvoiced frames. ``foreground`` is an optional
    externally supplied own-speech label; None when the source file carried
    no such field.
    """

    log_pitch: float
    intensity: float
    hf_lf_ratio: float
    foreground_prob: float
    foreground: bool | None = None


@dataclass
class FrameBlock:
    """Columnar storage for the frames of one recording.

    Recordings routinely hold thousands of frames, so frames live in parallel
    numpy arrays rather than object lists. ``foreground`` is None when the
    input carried no external own-speech labels.
    """

    log_pitch: np.ndarray  # float64, NaN = unvoiced
    intensity: np.ndarray
    hf_lf_ratio: np.ndarray
    foreground_prob: np.ndarray
    foreground: np.ndarray | None = None  # bool, optional external labels

    def __post_init__(self) -> None:
        n = len(self.log_pitch)
        if not (len(self.intensity) == len(self.hf_lf_ratio) == len(self.foreground_prob) == n):
            raise ValueError("frame columns must have equal length")
        if self.foreground is not None and len(self.foreground) != n:
            raise ValueError("foreground column length mismatch")

    def __len__(self) -> int:
        return len(self.log_pitch)

    def select(self, mask: np.ndarray) -> "FrameBlock":
        """New block holding only the frames where mask is True (order kept)."""
        return FrameBlock(
            log_pitch=self.log_pitch[mask],
            intensity=self.intensity[mask],
            hf_lf_ratio=self.hf_lf_ratio[mask],
            foreground_prob=self.foreground_prob[mask],
            foreground=None if self.foreground is None else self.foreground[mask],
        )

    def frame(self, i: int) -> FeatureFrame:
        return FeatureFrame(
            log_pitch=float(self.log_pitch[i]),
            intensity=float(self.intensity[i]),
            hf_lf_ratio=float(self.hf_lf_ratio[i]),
            foreground_prob=float(self.foreground_prob[i]),
            foreground=None if self.foreground is None else bool(self.foreground[i]),
        )

    @classmethod
    def from_frames(cls, frames: list[FeatureFrame]) -> "FrameBlock":
        fg: np.ndarray | None = None
        if frames and frames[0].foreground is not None:
            fg = np.array([bool(f.foreground) for f in frames])
        return cls(
            log_pitch=np.array([f.log_pitch for f in frames], dtype=float),
            intensity=np.array([f.intensity for f in frames], dtype=float),
            hf_lf_ratio=np.array([f.hf_lf_ratio for f in frames], dtype=float),
            foreground_prob=np.array([f.foreground_prob for f in frames], dtype=float),
            foreground=fg,
        )


@dataclass
class RecordingSegment:
    """One VAD-triggered ~20 s capture anchored to a shift minute."""

    participant_id: str
    shift_date: date
    minute_index: int
    frames: FrameBlock


@dataclass
class Cohort:
    """Everything parsed from one canonical input directory."""

    profiles: dict[str, ParticipantProfile] = field(default_factory=dict)
    hubs: dict[str, HubRecord] = field(default_factory=dict)
    recordings: list[RecordingSegment] = field(default_factory=list)
    rssi: list[RssiObservation] = field(default_factory=list)
    physiology: list[DailyPhysiology] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    warnings: dict[str, int] = field(default_factory=dict)

    def participant_ids(self) -> list[str]:
        return sorted(self.profiles)
