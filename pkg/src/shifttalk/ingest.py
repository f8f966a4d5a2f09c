"""Parse, validate and write the canonical input directory, plus cohort filters.

Canonical files (all UTF-8):

- participants.csv: participant_id,shift_type{day|night},unit_type{icu|non_icu},
  pos_affect,neg_affect,life_satisfaction
- hubs.csv: hub_id,location_category{ns|pat|lounge|med}
- rssi.csv: participant_id,shift_date,minute_index,hub_id,rssi
- recordings.jsonl: one JSON object per recording
  {participant_id, shift_date, minute_index,
   frames: [{log_pitch|null, intensity, hf_lf_ratio, foreground_prob[, foreground]}]}
- physiology.csv: participant_id,shift_date,walk_ratio,sleep_hours

Validation is strict (typed fields, range checks, referenced ids must exist)
except for RSSI values, which are clamped into [136, 193] with a warning
count, and minute indices, which may fall outside the shift window here and
are dropped later by filter_shift_window.
"""

from __future__ import annotations

import csv
import json
import math
from datetime import date
from pathlib import Path

import numpy as np

from .errors import DuplicateParticipant, MalformedRow, UnknownHub
from .model import (
    RSSI_MAX,
    RSSI_MIN,
    SHIFT_MINUTES,
    Cohort,
    DailyPhysiology,
    FrameBlock,
    HubCategory,
    HubRecord,
    ParticipantProfile,
    RecordingSegment,
    RssiObservation,
    ShiftType,
    UnitType,
)

PARTICIPANTS_FILE = "participants.csv"
HUBS_FILE = "hubs.csv"
RSSI_FILE = "rssi.csv"
RECORDINGS_FILE = "recordings.jsonl"
PHYSIOLOGY_FILE = "physiology.csv"

CANONICAL_FILES = (PARTICIPANTS_FILE, HUBS_FILE, RSSI_FILE, RECORDINGS_FILE, PHYSIOLOGY_FILE)


def _parse_date(text: str, file: str, line: int) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise MalformedRow(file, line, f"bad shift_date {text!r}") from None


def _parse_int(text: str, field: str, file: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedRow(file, line, f"bad integer for {field}: {text!r}") from None


def _parse_float(text: str, field: str, file: str, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(file, line, f"bad number for {field}: {text!r}") from None
    if math.isnan(value) or math.isinf(value):
        raise MalformedRow(file, line, f"non-finite value for {field}")
    return value


def _csv_rows(path: Path, expected_header: list[str]):
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(path.name, 1, "missing header") from None
        if header != expected_header:
            raise MalformedRow(path.name, 1, f"bad header {header!r}, expected {expected_header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise MalformedRow(path.name, lineno, f"expected {len(expected_header)} fields, got {len(row)}")
            yield lineno, row


def parse_participants(path: Path) -> dict[str, ParticipantProfile]:
    profiles: dict[str, ParticipantProfile] = {}
    header = ["participant_id", "shift_type", "unit_type", "pos_affect", "neg_affect", "life_satisfaction"]
    for lineno, row in _csv_rows(path, header):
        pid, shift_raw, unit_raw, pos_raw, neg_raw, swls_raw = row
        if pid in profiles:
            raise DuplicateParticipant(pid)
        try:
            shift = ShiftType(shift_raw)
        except ValueError:
            raise MalformedRow(path.name, lineno, f"bad shift_type {shift_raw!r}") from None
        try:
            unit = UnitType(unit_raw)
        except ValueError:
            raise MalformedRow(path.name, lineno, f"bad unit_type {unit_raw!r}") from None
        pos = _parse_int(pos_raw, "pos_affect", path.name, lineno)
        neg = _parse_int(neg_raw, "neg_affect", path.name, lineno)
        swls = _parse_float(swls_raw, "life_satisfaction", path.name, lineno)
        if not 10 <= pos <= 50:
            raise MalformedRow(path.name, lineno, f"pos_affect {pos} outside [10, 50]")
        if not 10 <= neg <= 50:
            raise MalformedRow(path.name, lineno, f"neg_affect {neg} outside [10, 50]")
        if not 1.0 <= swls <= 7.0:
            raise MalformedRow(path.name, lineno, f"life_satisfaction {swls} outside [1, 7]")
        profiles[pid] = ParticipantProfile(pid, shift, unit, pos, neg, swls)
    return profiles


def parse_hubs(path: Path) -> dict[str, HubRecord]:
    hubs: dict[str, HubRecord] = {}
    for lineno, row in _csv_rows(path, ["hub_id", "location_category"]):
        hub_id, cat_raw = row
        if hub_id in hubs:
            raise MalformedRow(path.name, lineno, f"duplicate hub_id {hub_id!r}")
        try:
            cat = HubCategory(cat_raw)
        except ValueError:
            raise MalformedRow(path.name, lineno, f"bad location_category {cat_raw!r}") from None
        hubs[hub_id] = HubRecord(hub_id, cat)
    return hubs


def parse_rssi(
    path: Path,
    hubs: dict[str, HubRecord],
    profiles: dict[str, ParticipantProfile],
    warnings: dict[str, int],
) -> list[RssiObservation]:
    observations: list[RssiObservation] = []
    header = ["participant_id", "shift_date", "minute_index", "hub_id", "rssi"]
    for lineno, row in _csv_rows(path, header):
        pid, date_raw, minute_raw, hub_id, rssi_raw = row
        if pid not in profiles:
            raise MalformedRow(path.name, lineno, f"unknown participant_id {pid!r}")
        if hub_id not in hubs:
            raise UnknownHub(hub_id)
        shift_date = _parse_date(date_raw, path.name, lineno)
        minute = _parse_int(minute_raw, "minute_index", path.name, lineno)
        rssi = _parse_int(rssi_raw, "rssi", path.name, lineno)
        if rssi < RSSI_MIN or rssi > RSSI_MAX:
            warnings["rssi_clamped"] = warnings.get("rssi_clamped", 0) + 1
            rssi = min(max(rssi, RSSI_MIN), RSSI_MAX)
        observations.append(RssiObservation(pid, shift_date, minute, hub_id, rssi))
    return observations


def parse_physiology(path: Path, profiles: dict[str, ParticipantProfile]) -> list[DailyPhysiology]:
    rows: list[DailyPhysiology] = []
    header = ["participant_id", "shift_date", "walk_ratio", "sleep_hours"]
    for lineno, row in _csv_rows(path, header):
        pid, date_raw, walk_raw, sleep_raw = row
        if pid not in profiles:
            raise MalformedRow(path.name, lineno, f"unknown participant_id {pid!r}")
        shift_date = _parse_date(date_raw, path.name, lineno)
        walk = _parse_float(walk_raw, "walk_ratio", path.name, lineno)
        sleep = _parse_float(sleep_raw, "sleep_hours", path.name, lineno)
        if not 0.0 <= walk <= 1.0:
            raise MalformedRow(path.name, lineno, f"walk_ratio {walk} outside [0, 1]")
        if not 0.0 <= sleep <= 24.0:
            raise MalformedRow(path.name, lineno, f"sleep_hours {sleep} outside [0, 24]")
        rows.append(DailyPhysiology(pid, shift_date, walk, sleep))
    return rows


def _frames_from_json(raw_frames: list, file: str, lineno: int) -> FrameBlock:
    has_fg = isinstance(raw_frames[0], dict) and "foreground" in raw_frames[0]
    try:
        log_pitch = np.array(
            [math.nan if f["log_pitch"] is None else f["log_pitch"] for f in raw_frames], dtype=float
        )
        intensity = np.array([f["intensity"] for f in raw_frames], dtype=float)
        hf_lf = np.array([f["hf_lf_ratio"] for f in raw_frames], dtype=float)
        fg_prob = np.array([f["foreground_prob"] for f in raw_frames], dtype=float)
        fg = np.array([f["foreground"] for f in raw_frames], dtype=bool) if has_fg else None
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRow(file, lineno, f"bad frame: {exc}") from None
    if np.any((fg_prob < 0.0) | (fg_prob > 1.0)):
        bad = int(np.argmax((fg_prob < 0.0) | (fg_prob > 1.0)))
        raise MalformedRow(file, lineno, f"frame {bad}: foreground_prob outside [0, 1]")
    if np.any(hf_lf < 0.0):
        bad = int(np.argmax(hf_lf < 0.0))
        raise MalformedRow(file, lineno, f"frame {bad}: hf_lf_ratio negative")
    if not (np.all(np.isfinite(intensity)) and np.all(np.isfinite(fg_prob)) and np.all(np.isfinite(hf_lf))):
        raise MalformedRow(file, lineno, "non-finite frame value")
    return FrameBlock(log_pitch, intensity, hf_lf, fg_prob, fg)


def parse_recordings(path: Path, profiles: dict[str, ParticipantProfile]) -> list[RecordingSegment]:
    recordings: list[RecordingSegment] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRow(path.name, lineno, f"invalid JSON: {exc.msg}") from None
            try:
                pid = obj["participant_id"]
                date_raw = obj["shift_date"]
                minute = obj["minute_index"]
                raw_frames = obj["frames"]
            except (KeyError, TypeError) as exc:
                raise MalformedRow(path.name, lineno, f"missing field: {exc}") from None
            if pid not in profiles:
                raise MalformedRow(path.name, lineno, f"unknown participant_id {pid!r}")
            if not isinstance(minute, int):
                raise MalformedRow(path.name, lineno, f"minute_index must be an integer, got {minute!r}")
            if not isinstance(raw_frames, list) or not raw_frames:
                raise MalformedRow(path.name, lineno, "frames must be a non-empty list")
            shift_date = _parse_date(str(date_raw), path.name, lineno)
            frames = _frames_from_json(raw_frames, path.name, lineno)
            recordings.append(RecordingSegment(pid, shift_date, minute, frames))
    return recordings


def parse_cohort(dir_path: str | Path) -> Cohort:
    """Parse the five canonical files into a validated Cohort.

    Row counts land in cohort.counts; clamp events in cohort.warnings.
    """
    root = Path(dir_path)
    for name in CANONICAL_FILES:
        if not (root / name).is_file():
            raise FileNotFoundError(root / name)
    warnings: dict[str, int] = {}
    profiles = parse_participants(root / PARTICIPANTS_FILE)
    hubs = parse_hubs(root / HUBS_FILE)
    rssi = parse_rssi(root / RSSI_FILE, hubs, profiles, warnings)
    recordings = parse_recordings(root / RECORDINGS_FILE, profiles)
    physiology = parse_physiology(root / PHYSIOLOGY_FILE, profiles)
    counts = {
        "participants": len(profiles),
        "hubs": len(hubs),
        "rssi": len(rssi),
        "recordings": len(recordings),
        "physiology": len(physiology),
    }
    return Cohort(profiles, hubs, recordings, rssi, physiology, counts, warnings)


# --- writers (shared by the simulator and round-trip tests) ---


def _fmt(value: float) -> str:
    """Shortest exact decimal repr, so write -> parse -> write is stable."""
    return repr(float(value))


def write_cohort(cohort: Cohort, dir_path: str | Path) -> None:
    """Write a cohort back out in the canonical formats (deterministic bytes)."""
    root = Path(dir_path)
    root.mkdir(parents=True, exist_ok=True)

    with (root / PARTICIPANTS_FILE).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "shift_type", "unit_type", "pos_affect", "neg_affect", "life_satisfaction"])
        for pid in sorted(cohort.profiles):
            p = cohort.profiles[pid]
            w.writerow([p.participant_id, p.shift_type.value, p.unit_type.value,
                        p.pos_affect, p.neg_affect, _fmt(p.life_satisfaction)])

    with (root / HUBS_FILE).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["hub_id", "location_category"])
        for hub_id in sorted(cohort.hubs):
            w.writerow([hub_id, cohort.hubs[hub_id].location_category.value])

    with (root / RSSI_FILE).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "shift_date", "minute_index", "hub_id", "rssi"])
        for o in cohort.rssi:
            w.writerow([o.participant_id, o.shift_date.isoformat(), o.minute_index, o.hub_id, o.rssi])

    with (root / RECORDINGS_FILE).open("wb") as fh:
        chunk: list[str] = []
        size = 0
        for r in cohort.recordings:
            line = _recording_json(r)
            chunk.append(line)
            size += len(line)
            if size > 1 << 22:
                fh.write(("\n".join(chunk) + "\n").encode("utf-8"))
                chunk, size = [], 0
        if chunk:
            fh.write(("\n".join(chunk) + "\n").encode("utf-8"))

    with (root / PHYSIOLOGY_FILE).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "shift_date", "walk_ratio", "sleep_hours"])
        for d in cohort.physiology:
            w.writerow([d.participant_id, d.shift_date.isoformat(), _fmt(d.walk_ratio), _fmt(d.sleep_hours)])


def _recording_json(rec: RecordingSegment) -> str:
    """Hand-assembled JSON line; float repr matches json.dumps exactly.

    Recording files run to millions of frames, so skipping the per-frame
    dict construction that json.dumps would need roughly halves write time.
    """
    fb = rec.frames
    lp_list = fb.log_pitch.tolist()
    it_list = fb.intensity.tolist()
    hf_list = fb.hf_lf_ratio.tolist()
    fp_list = fb.foreground_prob.tolist()
    fg_list = fb.foreground.tolist() if fb.foreground is not None else None
    parts = []
    for i in range(len(fb)):
        lp = lp_list[i]
        lp_text = "null" if lp != lp else repr(lp)
        tail = "" if fg_list is None else f',"foreground":{"true" if fg_list[i] else "false"}'
        parts.append(
            f'{{"log_pitch":{lp_text},"intensity":{it_list[i]!r},'
            f'"hf_lf_ratio":{hf_list[i]!r},"foreground_prob":{fp_list[i]!r}{tail}}}'
        )
    head = json.dumps(rec.participant_id)
    return (
        f'{{"participant_id":{head},"shift_date":"{rec.shift_date.isoformat()}",'
        f'"minute_index":{rec.minute_index},"frames":[{",".join(parts)}]}}'
    )


# --- cohort filters ---


def filter_shift_window(
    recordings: list[RecordingSegment],
    rssi: list[RssiObservation],
    profiles: dict[str, ParticipantProfile],
) -> tuple[list[RecordingSegment], list[RssiObservation], dict[str, int]]:
    """Keep only events inside the 12-hour shift window [0, 720).

    minute_index 0 is the shift start for both day and night schedules. The
    returned dict counts the dropped events; drops are never fatal.
    """
    kept_rec = [r for r in recordings if 0 <= r.minute_index < SHIFT_MINUTES]
    kept_rssi = [o for o in rssi if 0 <= o.minute_index < SHIFT_MINUTES]
    dropped = {
        "recordings_dropped": len(recordings) - len(kept_rec),
        "rssi_dropped": len(rssi) - len(kept_rssi),
    }
    return kept_rec, kept_rssi, dropped


def filter_min_days(cohort: Cohort, min_days: int = 5) -> Cohort:
    """Keep participants with recordings on at least min_days distinct shift dates."""
    if min_days < 1:
        raise ValueError("min_days must be >= 1")
    days: dict[str, set[date]] = {}
    for r in cohort.recordings:
        days.setdefault(r.participant_id, set()).add(r.shift_date)
    keep = {pid for pid, dates in days.items() if len(dates) >= min_days}
    profiles = {pid: p for pid, p in cohort.profiles.items() if pid in keep}
    filtered = Cohort(
        profiles=profiles,
        hubs=dict(cohort.hubs),
        recordings=[r for r in cohort.recordings if r.participant_id in keep],
        rssi=[o for o in cohort.rssi if o.participant_id in keep],
        physiology=[d for d in cohort.physiology if d.participant_id in keep],
        warnings=dict(cohort.warnings),
    )
    filtered.counts = {
        "participants": len(filtered.profiles),
        "hubs": len(filtered.hubs),
        "rssi": len(filtered.rssi),
        "recordings": len(filtered.recordings),
        "physiology": len(filtered.physiology),
    }
    return filtered
