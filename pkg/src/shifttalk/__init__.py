"""shifttalk: speaking-pattern analytics for wearable audio and Bluetooth
proximity data collected over 12-hour work shifts."""

__version__ = "0.1.0"

from .model import (
    Cohort,
    DailyPhysiology,
    FeatureFrame,
    FrameBlock,
    HubCategory,
    HubRecord,
    LocationCategory,
    ParticipantProfile,
    RecordingSegment,
    RssiObservation,
    ShiftType,
    UnitType,
)

__all__ = [
    "Cohort",
    "DailyPhysiology",
    "FeatureFrame",
    "FrameBlock",
    "HubCategory",
    "HubRecord",
    "LocationCategory",
    "ParticipantProfile",
    "RecordingSegment",
    "RssiObservation",
    "ShiftType",
    "UnitType",
    "__version__",
]
