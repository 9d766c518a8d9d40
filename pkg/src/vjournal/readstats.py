"""Readership log ingestion and also-read (co-read) statistics."""

from __future__ import annotations

import datetime as dt
import json
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from . import _kernels as K
from .corpus import Corpus, IngestReport
from .errors import NotFoundError, ValidationError

S_MAX = 200


@dataclass(frozen=True, order=True)
class ReadEvent:
    session: str
    record: str
    at: dt.datetime


def parse_timestamp(value: str) -> dt.datetime:
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    try:
        ts = dt.datetime.fromisoformat(value)
    except ValueError:
        raise ValidationError(f"invalid timestamp {value!r}") from None
    if ts.tzinfo is None:
        return ts.replace(tzinfo=dt.timezone.utc)
    return ts.astimezone(dt.timezone.utc)


class ReadLog:
    """Distinct (session, record) reads; the first timestamp seen is kept."""

    FILE = "reads.csv"

    def __init__(self, events: Iterable[ReadEvent] = ()):
        self._events: dict[tuple[str, str], ReadEvent] = {}
        for e in events:
            self.add(e)

    def add(self, event: ReadEvent) -> bool:
        key = (event.session, event.record)
        if key in self._events:
            return False
        self._events[key] = event
        return True

    def __len__(self) -> int:
        return len(self._events)

    @property
    def events(self) -> list[ReadEvent]:
        return sorted(self._events.values())

    def dumps(self) -> str:
        lines = ["session,record,at"]
        lines += [f"{e.session},{e.record},{e.at.isoformat()}" for e in self.events]
        return "\n".join(lines) + "\n"

    def save(self, directory: str | os.PathLike) -> Path:
        path = Path(directory) / self.FILE
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, directory: str | os.PathLike) -> ReadLog:
        path = Path(directory) / cls.FILE
        log = cls()
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines()[1:]:
                if line.strip():
                    session, record, at = line.split(",")
                    log.add(ReadEvent(session, record, parse_timestamp(at)))
        return log


def ingest_reads(log: ReadLog, path: str | os.PathLike, corpus: Corpus) -> IngestReport:
    """Append reads from a ``session_id,record_id,timestamp`` file.

    The first line is skipped when it starts with ``session``. Unknown records
    and malformed lines are rejected per line; repeated (session, record)
    pairs are accepted silently and stored once.
    """
    report = IngestReport()
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if lineno == 1 and line.lstrip().lower().startswith("session"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or not parts[0]:
            report.rejected.append((lineno, "malformed line"))
            continue
        session, record, stamp = parts
        if record not in corpus:
            report.rejected.append((lineno, f"unknown record id {record}"))
            continue
        try:
            at = parse_timestamp(stamp)
        except ValidationError as exc:
            report.rejected.append((lineno, str(exc)))
            continue
        if log.add(ReadEvent(session, record, at)):
            report.added += 1
    return report


@dataclass
class CoReadStats:
    # keys are merged-identity groups named by their smallest member id; pairs are (lo, hi)
    pair_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    read_counts: dict[str, int] = field(default_factory=dict)
    group_of: dict[str, str] = field(default_factory=dict)
    _adj: dict[str, dict[str, int]] | None = field(default=None, repr=False)

    def group(self, rid: str) -> str:
        return self.group_of.get(rid, rid)

    def pair(self, x: str, y: str) -> int:
        a, b = sorted((self.group(x), self.group(y)))
        return self.pair_counts.get((a, b), 0)

    def reads(self, rid: str) -> int:
        return self.read_counts.get(self.group(rid), 0)

    def neighbors(self, rid: str) -> dict[str, int]:
        if self._adj is None:
            adj: dict[str, dict[str, int]] = defaultdict(dict)
            for (a, b), c in self.pair_counts.items():
                adj[a][b] = c
                adj[b][a] = c
            self._adj = dict(adj)
        return self._adj.get(self.group(rid), {})

    def dumps(self) -> str:
        obj = {
            "pairs": [[a, b, c] for (a, b), c in sorted(self.pair_counts.items())],
            "read_counts": dict(sorted(self.read_counts.items())),
            "group_of": dict(sorted(self.group_of.items())),
        }
        return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def loads(cls, text: str) -> CoReadStats:
        obj = json.loads(text)
        return cls(
            pair_counts={(a, b): int(c) for a, b, c in obj["pairs"]},
            read_counts={k: int(v) for k, v in obj["read_counts"].items()},
            group_of=dict(obj["group_of"]),
        )


def compute_coread(events: Iterable[ReadEvent], corpus: Corpus | None = None, s_max: int = S_MAX) -> CoReadStats:
    """Distinct-session read counts and pair counts over merged-identity groups.

    Sessions that read more than ``s_max`` distinct records are treated as
    robots and contribute nothing. Without a corpus every record is its own group.
    """
    group_of = {rid: corpus.group_key(rid) for rid in corpus.ids} if corpus is not None else {}
    per_session: dict[str, set[str]] = defaultdict(set)
    for e in events:
        per_session[e.session].add(e.record)

    rows: list[list[str]] = []
    for session in sorted(per_session):
        recs = per_session[session]
        if len(recs) > s_max:
            continue
        rows.append(sorted({group_of.get(r, r) for r in recs}))

    stats = CoReadStats(group_of=group_of)
    names = sorted({g for row in rows for g in row})
    if not names:
        return stats
    code = {g: i for i, g in enumerate(names)}
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    items = np.fromiter((code[g] for row in rows for g in row), dtype=K.IDX, count=int(indptr[-1]))

    reads = np.bincount(items, minlength=len(names))
    stats.read_counts = {names[i]: int(c) for i, c in enumerate(reads) if c}
    lo, hi, counts = K.count_pairs(indptr, items, len(names))
    stats.pair_counts = {(names[a], names[b]): int(c) for a, b, c in zip(lo.tolist(), hi.tolist(), counts.tolist())}
    return stats


def also_read_neighbors(rid: str, stats: CoReadStats, k: int) -> list[tuple[str, int]]:
    """Top ``k`` groups co-read with ``rid``'s group, ties by id ascending."""
    if stats.group_of and rid not in stats.group_of:
        raise NotFoundError(f"unknown record id {rid!r}")
    if k <= 0:
        return []
    ranked = sorted(stats.neighbors(rid).items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]
