"""Per-story activation logs (votes, retweets).

Logs are CSV files with header ``story_id,user_id,timestamp`` and an optional
``is_submitter`` column.  Each story's events are validated into an
:class:`ActivationSequence`: stable-sorted by time (ties keep file order),
one entry per user (earliest kept).
"""
from __future__ import annotations

import csv
import json
import logging
from collections import Counter
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .graph import FollowerGraph, parse_id

log = logging.getLogger(__name__)

__all__ = [
    "ActivationEvent",
    "ActivationSequence",
    "LogFormatError",
    "ValidationReport",
    "validate_sequence",
    "load_activation_log",
    "write_activation_log",
    "activity_distribution",
]

HEADER = ("story_id", "user_id", "timestamp")


class LogFormatError(ValueError):
    def __init__(self, path, lineno: int, reason: str):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {reason}")


@dataclass(frozen=True)
class ActivationEvent:
    story: str
    user: Hashable
    time: int

    def __post_init__(self):
        if self.time < 0:
            raise ValueError(f"negative timestamp {self.time}")


@dataclass(frozen=True)
class ActivationSequence:
    """Time-ordered activations of one story.

    ``submitter`` defaults to the first user; a log may override it.
    ``ties`` counts adjacent entries sharing a timestamp.
    """

    story: str
    users: tuple
    times: tuple
    submitter: Hashable = None
    ties: int = 0

    def __post_init__(self):
        if len(self.users) != len(self.times):
            raise ValueError("users and times differ in length")
        if self.submitter is None and self.users:
            object.__setattr__(self, "submitter", self.users[0])

    def __len__(self) -> int:
        return len(self.users)

    def __iter__(self):
        return iter(zip(self.users, self.times))

    @property
    def submitter_overridden(self) -> bool:
        return bool(self.users) and self.submitter != self.users[0]


def validate_sequence(
    story: str,
    events: Iterable[tuple[Hashable, int]],
    submitter: Hashable = None,
) -> tuple[ActivationSequence, int]:
    """Sort, de-duplicate and wrap raw ``(user, time)`` events.

    Returns the sequence and the number of duplicate events dropped.
    """
    events = list(events)
    for _, t in events:
        if t < 0:
            raise ValueError(f"story {story}: negative timestamp {t}")
    # sorted() is stable, so equal timestamps keep input order
    ordered = sorted(events, key=lambda e: e[1])
    seen = set()
    users, times = [], []
    for u, t in ordered:
        if u in seen:
            continue
        seen.add(u)
        users.append(u)
        times.append(t)
    dropped = len(ordered) - len(users)
    if submitter is not None and submitter not in seen:
        raise ValueError(f"story {story}: submitter {submitter!r} has no activation")
    ties = sum(1 for a, b in zip(times, times[1:]) if a == b)
    seq = ActivationSequence(story, tuple(users), tuple(times), submitter, ties)
    return seq, dropped


@dataclass
class ValidationReport:
    stories: int = 0
    events: int = 0
    duplicates_dropped: int = 0
    unknown_users: int = 0
    tied_timestamps: int = 0
    duplicates_by_story: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "stories": self.stories,
            "events": self.events,
            "duplicates_dropped": self.duplicates_dropped,
            "unknown_users": self.unknown_users,
            "tied_timestamps": self.tied_timestamps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def load_activation_log(
    path, graph: FollowerGraph | None = None, with_report: bool = False
):
    """Read an activation log into ``{story_id: ActivationSequence}``.

    Stories are returned sorted by id.  Duplicate ``(story, user)`` rows are
    counted, not rejected.  With ``with_report=True`` a
    :class:`ValidationReport` is returned as well; ``unknown_users`` is only
    filled when a graph is given.
    """
    path = Path(path)
    raw: dict[str, list] = {}
    override: dict[str, Hashable] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is not None:
            header = [h.strip() for h in header]
            if tuple(header[:3]) != HEADER or len(header) > 4 or (
                len(header) == 4 and header[3] != "is_submitter"
            ):
                raise LogFormatError(path, 1, f"bad header {header!r}")
        has_flag = header is not None and len(header) == 4
        for row in reader:
            lineno = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) not in (3, 4) or (len(row) == 4 and not has_flag):
                raise LogFormatError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
            story, user, ts = (x.strip() for x in row[:3])
            if not story or not user:
                raise LogFormatError(path, lineno, "empty story or user id")
            try:
                t = int(ts)
            except ValueError:
                raise LogFormatError(path, lineno, f"timestamp {ts!r} is not an integer") from None
            if t < 0:
                raise LogFormatError(path, lineno, f"negative timestamp {t}")
            uid = parse_id(user)
            raw.setdefault(story, []).append((uid, t))
            if len(row) == 4:
                flag = row[3].strip()
                if flag not in ("0", "1", ""):
                    raise LogFormatError(path, lineno, f"is_submitter must be 0/1, got {flag!r}")
                if flag == "1":
                    if story in override and override[story] != uid:
                        raise LogFormatError(path, lineno, f"story {story} has two submitters")
                    override[story] = uid

    report = ValidationReport()
    out = {}
    for story in sorted(raw):
        seq, dropped = validate_sequence(story, raw[story], override.get(story))
        out[story] = seq
        report.events += len(seq)
        report.duplicates_dropped += dropped
        report.tied_timestamps += seq.ties
        if dropped:
            report.duplicates_by_story[story] = dropped
        if graph is not None:
            report.unknown_users += sum(1 for u in seq.users if u not in graph)
    report.stories = len(out)
    if report.tied_timestamps:
        log.info("%s: %d tied timestamp(s) ordered by file position", path, report.tied_timestamps)
    if with_report:
        return out, report
    return out


def write_activation_log(
    sequences: Iterable[ActivationSequence], path, submitter_column: bool = False
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER + (("is_submitter",) if submitter_column else ()))
        for seq in sequences:
            for u, t in seq:
                row = [seq.story, u, t]
                if submitter_column:
                    row.append(int(u == seq.submitter))
                w.writerow(row)


def activity_distribution(logs: Mapping[str, ActivationSequence]) -> dict[int, int]:
    """Histogram ``activations per user -> number of users``."""
    per_user = Counter()
    for seq in logs.values():
        per_user.update(seq.users)
    return dict(sorted(Counter(per_user.values()).items()))
