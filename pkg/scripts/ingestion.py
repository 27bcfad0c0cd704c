#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
ingestion.py

Comment-event corpora in, measurable quantities out.

Event file (JSONL, one object per line; '#' lines are comments):
  {"kind": "topic", "topic_id": "t1", "created_at": 0, "removed_at": 3600}
  {"kind": "comment", "topic_id": "t1", "comment_id": "c1", "parent_id": "",
   "user_id": "u7", "ts": 120}

parent_id "" replies to the topic's root post. ts / created_at / removed_at
are epoch seconds (int or float) or ISO-8601 strings. A record
  {"kind": "activity", "user_id": "u7", "ts": 300}
is a comment made on a topic outside the file; it only feeds waiting times.
User ids of the form <topic_id>.u<k> belong to that topic alone.

The CSV form uses the header
  kind,topic_id,comment_id,parent_id,user_id,ts,created_at,removed_at
with an optional category column.

Problems in the file never abort a parse: they are recorded with their
line number in Corpus.issues and the offending row is dropped or repaired.
All derived times are minutes since topic creation.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from datetime import timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from dateutil import parser as dateparser

from conversation import TICKS_PER_MINUTE, CommentEvent, Thread
from errors import DataError, ParameterError, emit
from renewal import RenewalTrace

DEFAULT_INFLECTION_Q = 0.95
MIN_INFLECTION_COMMENTS = 5
SECONDS_PER_MINUTE = float(TICKS_PER_MINUTE)
CSV_COLUMNS = ("kind", "topic_id", "comment_id", "parent_id", "user_id", "ts", "created_at", "removed_at")
FORMATS = ("jsonl", "csv")


def log(msg: str) -> None:
    emit("ingestion", msg)


@dataclass
class RawComment:
    topic_id: str
    comment_id: str
    parent_id: str  # "" = reply to the root post
    user_id: str
    ts: float  # epoch seconds
    category: str = ""
    line: int = 0


@dataclass
class Topic:
    topic_id: str
    created_at: float
    removed_at: Optional[float] = None
    comments: List[RawComment] = field(default_factory=list)
    category: str = ""

    def minutes(self) -> np.ndarray:
        """Sorted comment times in minutes since creation."""
        ts = np.array([c.ts for c in self.comments], dtype=float)
        return np.sort(ts - self.created_at) / SECONDS_PER_MINUTE

    @property
    def exposure_minutes(self) -> Optional[float]:
        if self.removed_at is None:
            return None
        return (self.removed_at - self.created_at) / SECONDS_PER_MINUTE


@dataclass
class Corpus:
    topics: Dict[str, Topic] = field(default_factory=dict)
    issues: List[str] = field(default_factory=list)
    activity: List[Tuple[str, float]] = field(default_factory=list)  # (user_id, epoch seconds)

    def __len__(self) -> int:
        return len(self.topics)

    @property
    def n_comments(self) -> int:
        return sum(len(t.comments) for t in self.topics.values())

    def issue(self, line: int, msg: str) -> None:
        self.issues.append(f"line {line}: {msg}" if line else msg)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_timestamp(value) -> float:
    """Epoch seconds from a number, a numeric string or an ISO-8601 string."""
    if isinstance(value, bool) or value is None:
        raise DataError(f"bad timestamp: {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    else:
        text = str(value).strip()
        if not text:
            raise DataError("empty timestamp")
        try:
            out = float(text)
        except ValueError:
            try:
                dt = dateparser.isoparse(text)
            except (ValueError, OverflowError) as e:
                raise DataError(f"bad timestamp: {text!r}") from e
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            out = dt.timestamp()
    if not math.isfinite(out) or out < 0:
        raise DataError(f"timestamp must be a non-negative number, got {value!r}")
    return out


def _text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value).strip()


def _jsonl_records(lines: Iterable[Tuple[int, str]], corpus: Corpus):
    for lineno, text in lines:
        try:
            rec = json.loads(text)
        except json.JSONDecodeError as e:
            corpus.issue(lineno, f"malformed JSON ({e.msg})")
            continue
        if not isinstance(rec, dict):
            corpus.issue(lineno, "expected a JSON object")
            continue
        yield lineno, rec


def _csv_records(lines: Sequence[Tuple[int, str]], corpus: Corpus):
    if not lines:
        return
    rows = csv.reader([text for _, text in lines])
    header = [h.strip() for h in next(rows)]
    for (lineno, _), row in zip(lines[1:], rows):
        if len(row) != len(header):
            corpus.issue(lineno, f"expected {len(header)} fields, got {len(row)}")
            continue
        yield lineno, {k: v for k, v in zip(header, row) if v != ""}


def _record_kind(rec: dict) -> str:
    kind = _text(rec.get("kind")).lower()
    if kind:
        return kind
    if _text(rec.get("comment_id")):
        return "comment"
    return "topic" if "created_at" in rec else "comment"


def parse_corpus(path: Path, fmt: Optional[str] = None) -> Corpus:
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if fmt not in FORMATS:
        raise ParameterError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    if not path.exists():
        raise DataError(f"corpus not found: {path}")

    corpus = Corpus()
    raw = path.read_text(encoding="utf-8").splitlines()
    lines = [(i, t) for i, t in enumerate(raw, start=1) if t.strip() and not t.lstrip().startswith("#")]
    records = _jsonl_records(lines, corpus) if fmt == "jsonl" else _csv_records(lines, corpus)

    headers: Dict[str, Topic] = {}
    pending: Dict[str, List[RawComment]] = {}
    for lineno, rec in records:
        kind = _record_kind(rec)
        if kind == "activity":
            user_id = _text(rec.get("user_id"))
            if not user_id:
                corpus.issue(lineno, "activity record without user_id")
                continue
            try:
                corpus.activity.append((user_id, parse_timestamp(rec.get("ts"))))
            except DataError as e:
                corpus.issue(lineno, str(e))
            continue
        topic_id = _text(rec.get("topic_id"))
        if not topic_id:
            corpus.issue(lineno, "missing topic_id")
            continue
        try:
            if kind == "topic":
                if topic_id in headers:
                    corpus.issue(lineno, f"duplicate header for topic {topic_id!r}")
                    continue
                created = parse_timestamp(rec.get("created_at"))
                removed = rec.get("removed_at")
                removed = None if removed in (None, "") else parse_timestamp(removed)
                if removed is not None and removed < created:
                    corpus.issue(lineno, f"topic {topic_id!r} removed before creation; removal ignored")
                    removed = None
                headers[topic_id] = Topic(topic_id, created, removed, category=_text(rec.get("category")))
            elif kind == "comment":
                comment_id = _text(rec.get("comment_id"))
                if not comment_id:
                    corpus.issue(lineno, "missing comment_id")
                    continue
                pending.setdefault(topic_id, []).append(
                    RawComment(
                        topic_id=topic_id,
                        comment_id=comment_id,
                        parent_id=_text(rec.get("parent_id")),
                        user_id=_text(rec.get("user_id")),
                        ts=parse_timestamp(rec.get("ts")),
                        category=_text(rec.get("category")),
                        line=lineno,
                    )
                )
            else:
                corpus.issue(lineno, f"unknown record kind {kind!r}")
        except DataError as e:
            corpus.issue(lineno, str(e))

    for topic_id in list(headers) + [t for t in pending if t not in headers]:
        comments = pending.get(topic_id, [])
        topic = headers.get(topic_id)
        if topic is None:
            topic = Topic(topic_id, min(c.ts for c in comments))
            corpus.issue(0, f"topic {topic_id!r} has no header line; created_at set to its earliest comment")
        _attach_comments(corpus, topic, comments)
        corpus.topics[topic_id] = topic

    if corpus.issues:
        log(f"{path.name}: {len(corpus.issues)} issues (first: {corpus.issues[0]})")
    log(f"{path.name}: {len(corpus)} topics, {corpus.n_comments} comments, {len(corpus.activity)} activity records")
    return corpus


def _attach_comments(corpus: Corpus, topic: Topic, comments: List[RawComment]) -> None:
    seen = set()
    kept: List[RawComment] = []
    for c in comments:
        if c.comment_id in seen:
            corpus.issue(c.line, f"duplicate comment id {c.comment_id!r} in topic {topic.topic_id!r}")
            continue
        if c.ts < topic.created_at:
            corpus.issue(c.line, f"comment {c.comment_id!r} precedes creation of topic {topic.topic_id!r}; dropped")
            continue
        seen.add(c.comment_id)
        kept.append(c)
    for c in kept:
        if c.parent_id and c.parent_id not in seen:
            corpus.issue(c.line, f"unknown parent {c.parent_id!r}; comment {c.comment_id!r} reattached to root")
            c.parent_id = ""
    kept.sort(key=lambda c: c.ts)
    topic.comments = _parents_first(corpus, kept)


def _parents_first(corpus: Corpus, comments: List[RawComment]) -> List[RawComment]:
    """
    Time order with every reply after its parent. A reply sharing its
    parent's stamp waits for the parent; a reply stamped before its parent
    goes to the root.
    """
    by_id = {c.comment_id: c for c in comments}
    placed = set()
    waiting: Dict[str, List[RawComment]] = {}
    out: List[RawComment] = []

    def place(first: RawComment) -> None:
        stack = [first]
        while stack:
            c = stack.pop()
            out.append(c)
            placed.add(c.comment_id)
            stack.extend(reversed(waiting.pop(c.comment_id, [])))

    for c in comments:
        pid = c.parent_id
        if not pid or pid in placed:
            place(c)
        elif by_id[pid].ts > c.ts:
            corpus.issue(c.line, f"reply {c.comment_id!r} is stamped before its parent {pid!r}; reattached to root")
            c.parent_id = ""
            place(c)
        else:
            waiting.setdefault(pid, []).append(c)
    for children in waiting.values():
        for c in children:
            corpus.issue(c.line, f"reply {c.comment_id!r} is part of a parent cycle; reattached to root")
            c.parent_id = ""
            out.append(c)
    out.sort(key=lambda c: c.ts)
    return out


# ---------------------------------------------------------------------------
# Measurables
# ---------------------------------------------------------------------------

def waiting_times(corpus: Corpus) -> np.ndarray:
    """Gaps between consecutive comments of each user, pooled, in minutes; activity records count."""
    by_user: Dict[str, List[float]] = {}
    for topic in corpus.topics.values():
        for c in topic.comments:
            if c.user_id:
                by_user.setdefault(c.user_id, []).append(c.ts)
    for user_id, ts in corpus.activity:
        by_user.setdefault(user_id, []).append(ts)
    gaps = [np.diff(np.sort(np.asarray(ts))) for _, ts in sorted(by_user.items()) if len(ts) > 1]
    pooled = np.concatenate(gaps) / SECONDS_PER_MINUTE if gaps else np.empty(0)
    zeros = int(np.count_nonzero(pooled <= 0))
    if zeros:
        log(f"dropped {zeros} zero waiting times")
    return pooled[pooled > 0]


def exposure_durations(corpus: Corpus) -> np.ndarray:
    out = []
    missing = 0
    for topic in corpus.topics.values():
        minutes = topic.exposure_minutes
        if minutes is None:
            missing += 1
        elif minutes > 0:
            out.append(minutes)
        else:
            missing += 1
    if missing:
        log(f"WARNING: {missing} topics without a usable removal stamp skipped")
    if not out:
        log("WARNING: no exposure durations in corpus")
    return np.asarray(out, dtype=float)


def detect_inflection(times, q: float = DEFAULT_INFLECTION_Q) -> float:
    """Earliest time at which the cumulative count reaches q of the final count."""
    if not 0 < q <= 1:
        raise ParameterError(f"q must be in (0, 1], got {q}")
    t = np.sort(np.asarray(times, dtype=float).ravel())
    if t.size < MIN_INFLECTION_COMMENTS:
        raise DataError(f"detect_inflection: need at least {MIN_INFLECTION_COMMENTS} comments, got {t.size}")
    need = max(1, math.ceil(q * t.size - 1e-9))
    return float(t[need - 1])


def before_after_ratio(times, inflection: float) -> float:
    if inflection < 0:
        raise ParameterError(f"inflection must be >= 0, got {inflection}")
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0:
        raise DataError("before_after_ratio: no comments")
    return float(np.count_nonzero(t <= inflection)) / t.size


def topic_inflection(topic: Topic, q: float = DEFAULT_INFLECTION_Q) -> float:
    """The removal stamp when recorded, else the q-rule."""
    if topic.exposure_minutes is not None:
        return topic.exposure_minutes
    return detect_inflection(topic.minutes(), q)


def topic_sizes(corpus: Corpus, q: float = DEFAULT_INFLECTION_Q) -> np.ndarray:
    """N(T) per topic: comments up to the inflection point."""
    sizes = []
    skipped = 0
    for topic in corpus.topics.values():
        try:
            cut = topic_inflection(topic, q)
        except DataError:
            skipped += 1
            continue
        sizes.append(int(np.count_nonzero(topic.minutes() <= cut)))
    if skipped:
        log(f"{skipped} topics without removal stamp and too few comments skipped")
    return np.asarray(sizes, dtype=float)


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

_SIM_USER = re.compile(r"^u(\d+)$")


def _stamp(seconds: float):
    """Whole seconds are written as integers."""
    nearest = round(seconds)
    return int(nearest) if abs(seconds - nearest) < 1e-6 else float(seconds)


def _user_label(thread: Thread, user: Optional[int]) -> str:
    if user is None:
        return ""
    return f"u{user}" if thread.users_shared else f"{thread.topic_id}.u{user}"


def _thread_records(thread: Thread) -> List[dict]:
    created = thread.created_at
    out = [
        {
            "kind": "topic",
            "topic_id": thread.topic_id,
            "created_at": _stamp(created),
            "removed_at": _stamp(created + thread.T * SECONDS_PER_MINUTE),
        }
    ]
    for e in thread.events[1:]:
        out.append(
            {
                "kind": "comment",
                "topic_id": thread.topic_id,
                "comment_id": str(e.id),
                "parent_id": "" if e.parent == 0 else str(e.parent),
                "user_id": _user_label(thread, e.user),
                "ts": _stamp(created + e.time * SECONDS_PER_MINUTE),
            }
        )
    return out


def _activity_records(activity: Iterable[Tuple[int, float]]) -> Iterable[dict]:
    for user, seconds in activity:
        yield {"kind": "activity", "user_id": f"u{user}", "ts": _stamp(seconds)}


def write_events(
    path: Path,
    threads: Sequence[Thread],
    header: str = "",
    fmt: str = "jsonl",
    activity: Optional[Iterable[Tuple[int, float]]] = None,
) -> None:
    """
    One model time unit is written as one minute after the thread's
    created_at. activity holds (user, seconds) pairs for comments made
    outside these threads; they follow the threads in the file.
    """
    if fmt not in FORMATS:
        raise ParameterError(f"unknown corpus format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = (rec for thread in threads for rec in _thread_records(thread))
    extra = _activity_records(activity or ())
    with path.open("w", encoding="utf-8", newline="") as f:
        if header:
            f.write(f"# {header}\n")
        if fmt == "jsonl":
            for rec in records:
                f.write(json.dumps(rec) + "\n")
            for rec in extra:
                f.write(json.dumps(rec) + "\n")
            return
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in rec.items()})
        for rec in extra:
            writer.writerow(rec)


def _topic_users(topic: Topic, users: Dict[str, int]) -> Tuple[List[Optional[int]], bool]:
    """Integer users for a topic's comments, and whether the ids are site-wide."""
    scoped = re.compile(rf"^{re.escape(topic.topic_id)}\.u(\d+)$")
    labels = [c.user_id for c in topic.comments]
    matches = [scoped.match(u) for u in labels if u]
    if matches and all(matches):
        return [int(scoped.match(u).group(1)) if u else None for u in labels], False
    out: List[Optional[int]] = []
    for u in labels:
        if not u:
            out.append(None)
            continue
        m = _SIM_USER.match(u)
        out.append(int(m.group(1)) if m else users.setdefault(u, len(users)))
    return out, True


def corpus_threads(corpus: Corpus, q: float = DEFAULT_INFLECTION_Q, clip: bool = True) -> List[Thread]:
    """
    Topics as Thread objects (times in minutes). T is the removal stamp, else
    the detected inflection, else the last comment. clip drops comments after T.
    """
    users: Dict[str, int] = {}
    threads: List[Thread] = []
    no_T = 0
    for topic in corpus.topics.values():
        minutes = topic.minutes()
        try:
            T = topic_inflection(topic, q)
        except DataError:
            if minutes.size == 0:
                continue
            T = float(minutes[-1])
            no_T += 1
        thread = Thread.root_only(None, T, topic.topic_id, created_at=topic.created_at)
        labels, thread.users_shared = _topic_users(topic, users)
        index: Dict[str, int] = {}
        for c, user in zip(topic.comments, labels):
            t = (c.ts - topic.created_at) / SECONDS_PER_MINUTE
            if clip and t > T:
                continue
            parent = index.get(c.parent_id, 0) if c.parent_id else 0
            node = len(thread.events)
            thread.events.append(CommentEvent(node, parent, t, user))
            index[c.comment_id] = node
        if not clip:
            thread.T = max(T, thread.events[-1].time)
        threads.append(thread)
    if no_T:
        log(f"{no_T} topics without removal stamp or inflection; T set to their last comment")
    return threads


def corpus_from_user_traces(traces: Sequence[RenewalTrace], topic_id: str = "traces") -> Corpus:
    """One topic holding every event of every trace; trace i is user u<i>."""
    corpus = Corpus()
    horizon = max((tr.horizon for tr in traces), default=0.0)
    topic = Topic(topic_id, 0.0, horizon * SECONDS_PER_MINUTE)
    for i, trace in enumerate(traces):
        for j, t in enumerate(trace.event_times):
            topic.comments.append(RawComment(topic_id, f"{i}.{j}", "", f"u{i}", float(t) * SECONDS_PER_MINUTE))
    topic.comments.sort(key=lambda c: c.ts)
    corpus.topics[topic_id] = topic
    return corpus


def read_samples(path: Path, column: Optional[str] = None) -> np.ndarray:
    """Numbers from a CSV file: the named column, else the first one. '#' lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"samples file not found: {path}")
    lines = [t for t in path.read_text(encoding="utf-8").splitlines() if t.strip() and not t.lstrip().startswith("#")]
    rows = list(csv.reader(lines))
    if not rows:
        return np.empty(0)
    index = 0
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        header = [h.strip() for h in rows.pop(0)]
        if column is not None:
            if column not in header:
                raise DataError(f"{path.name}: no column {column!r} (have {header})")
            index = header.index(column)
    else:
        if column is not None:
            raise DataError(f"{path.name}: column {column!r} requested but the file has no header")
    out = []
    for lineno, row in enumerate(rows, start=1):
        try:
            out.append(float(row[index]))
        except (ValueError, IndexError) as e:
            raise DataError(f"{path.name}: bad number in data row {lineno}") from e
    return np.asarray(out, dtype=float)
