"""Group valid recordings into speech sessions and compute session features.

A speech session is a maximal run of recordings whose minute indices are
consecutive (gap of one minute between recordings). A recording occupies
exactly its one-minute slot, so a session's duration is last - first + 1
and every session minute carries a recording.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from .errors import EmptyInput
from .locate import LocationTimeline
from .model import LocationCategory, RecordingSegment


@dataclass
class SpeechSession:
    participant_id: str
    shift_date: date
    minute_indices: list[int]  # sorted, consecutive
    location_minutes: dict[LocationCategory, int]

    @property
    def start(self) -> int:
        return self.minute_indices[0]

    @property
    def last(self) -> int:
        return self.minute_indices[-1]

    @property
    def duration_min(self) -> int:
        return self.last - self.start + 1


def build_sessions(
    valid_recordings: list[RecordingSegment],
    timeline: LocationTimeline,
) -> list[SpeechSession]:
    """Sessions for one (participant, shift), sorted by start minute.

    Duplicate minute indices collapse; each session minute is attributed to
    the timeline's category for that minute.
    """
    if not valid_recordings:
        return []
    pid = valid_recordings[0].participant_id
    shift_date = valid_recordings[0].shift_date
    minutes = sorted({r.minute_index for r in valid_recordings})
    runs: list[list[int]] = [[minutes[0]]]
    for m in minutes[1:]:
        if m - runs[-1][-1] <= 1:
            runs[-1].append(m)
        else:
            runs.append([m])
    sessions = []
    for run in runs:
        loc_minutes: dict[LocationCategory, int] = {cat: 0 for cat in LocationCategory}
        for m in run:
            loc_minutes[timeline.category(m)] += 1
        sessions.append(SpeechSession(pid, shift_date, run, loc_minutes))
    return sessions


def inter_session_times(sessions: list[SpeechSession]) -> list[int]:
    """Gaps in minutes between consecutive sessions (end of one to start of next)."""
    ordered = sorted(sessions, key=lambda s: s.start)
    return [nxt.start - (prev.last + 1) for prev, nxt in zip(ordered, ordered[1:])]


def gt1min_session_ratio(sessions: list[SpeechSession]) -> float:
    """Fraction of sessions longer than one minute (duration >= 2)."""
    if not sessions:
        raise EmptyInput("no sessions")
    return sum(1 for s in sessions if s.duration_min >= 2) / len(sessions)


def session_occurrence_rate(sessions: list[SpeechSession], category: LocationCategory) -> float:
    """Share of total session time spent at the given location category."""
    total = sum(s.duration_min for s in sessions)
    if total == 0:
        raise EmptyInput("no session time")
    at_category = sum(s.location_minutes.get(category, 0) for s in sessions)
    return at_category / total
