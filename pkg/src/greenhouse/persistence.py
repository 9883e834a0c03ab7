"""Append-only history log with per-record CRC and periodic snapshots.

Each record is written as [u32 length][u32 crc32][payload], little endian,
where the payload is one UTF-8 TSV line: timestamp, record class, body.
Bodies hold frame bytes as hex (readings, statuses, instructions) or short
key-value text (mode changes, session events), never structured wire
formats.  A torn tail (partial write from a crash) is detected by the
length/CRC pair, reported, and truncated on the next open so the log can
keep growing; completed records are never rewritten.

The snapshot file accelerates restart: it stores the latest record per
class and the log offset it covers.  It is advisory — the log alone is
always sufficient to recover.
"""

from __future__ import annotations

import os
import struct
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

_HEADER = struct.Struct("<II")

LOG_NAME = "history.log"
SNAPSHOT_NAME = "snapshot.txt"

# Record classes, kept as data so exports and queries can enumerate them.
CLASSES = ("reading", "status", "instruction", "mode", "session", "error")


@dataclass(frozen=True)
class Record:
    timestamp: float
    record_class: str
    body: str

    def payload(self) -> bytes:
        if "\t" in self.record_class or "\n" in self.body or "\t" in self.body:
            raise ValueError("record fields must not contain tabs or newlines")
        return f"{self.timestamp!r}\t{self.record_class}\t{self.body}".encode()

    @classmethod
    def from_payload(cls, payload: bytes) -> "Record":
        ts, record_class, body = payload.decode().split("\t", 2)
        return cls(float(ts), record_class, body)


@dataclass(frozen=True)
class ScanResult:
    records: list[Record]
    valid_bytes: int  # offset of the first torn/invalid byte, if any
    torn: bool


def scan_log(path: Path | str) -> ScanResult:
    """Read every intact record; stop at the first torn or corrupt one."""
    path = Path(path)
    records: list[Record] = []
    offset = 0
    if not path.exists():
        return ScanResult(records, 0, False)
    data = path.read_bytes()
    n = len(data)
    while offset + _HEADER.size <= n:
        length, crc = _HEADER.unpack_from(data, offset)
        start = offset + _HEADER.size
        end = start + length
        if end > n:
            return ScanResult(records, offset, True)
        payload = data[offset + _HEADER.size : end]
        if zlib.crc32(payload) != crc:
            return ScanResult(records, offset, True)
        try:
            records.append(Record.from_payload(payload))
        except (UnicodeDecodeError, ValueError):
            return ScanResult(records, offset, True)
        offset = end
    if offset != n:
        return ScanResult(records, offset, True)
    return ScanResult(records, offset, False)


class AppendLog:
    """Single-appender log file.  Opening repairs a torn tail in place."""

    def __init__(self, path: Path | str, fsync: bool = False) -> None:
        self.path = Path(path)
        self.fsync = fsync
        scan = scan_log(self.path)
        if scan.torn:
            print(
                f"history log: truncating torn tail at byte {scan.valid_bytes}",
                file=sys.stderr,
            )
            with open(self.path, "r+b") as fh:
                fh.truncate(scan.valid_bytes)
        self._records_on_disk = len(scan.records)
        self._fh = open(self.path, "ab")

    @property
    def records_on_disk(self) -> int:
        return self._records_on_disk

    def append(self, record: Record) -> None:
        payload = record.payload()
        frame = _HEADER.pack(len(payload), zlib.crc32(payload)) + payload
        self._fh.write(frame)
        self._fh.flush()
        if self.fsync:
            os.fsync(self._fh.fileno())
        self._records_on_disk += 1

    def offset(self) -> int:
        return self._fh.tell()

    def close(self) -> None:
        self._fh.close()


class HistoryStore:
    """Log plus snapshot plus in-memory latest-per-class view."""

    def __init__(
        self,
        data_dir: Path | str,
        fsync: bool = False,
        snapshot_every: int = 200,
    ) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.snapshot_every = snapshot_every
        self.log = AppendLog(self.data_dir / LOG_NAME, fsync=fsync)
        self.latest: dict[str, Record] = {}
        self._since_snapshot = 0
        for record in scan_log(self.log.path).records:
            self.latest[record.record_class] = record

    # -- writes ---------------------------------------------------------------

    def append(self, timestamp: float, record_class: str, body: str) -> Record:
        record = Record(timestamp, record_class, body)
        self.log.append(record)
        self.latest[record_class] = record
        self._since_snapshot += 1
        if self._since_snapshot >= self.snapshot_every:
            self.write_snapshot()
        return record

    def write_snapshot(self) -> None:
        """Latest record per class + covered log offset, written atomically."""
        tmp = self.data_dir / (SNAPSHOT_NAME + ".tmp")
        lines = [f"offset\t{self.log.offset()}"]
        for record_class in sorted(self.latest):
            record = self.latest[record_class]
            lines.append(
                f"{record.timestamp!r}\t{record.record_class}\t{record.body}"
            )
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        os.replace(tmp, self.data_dir / SNAPSHOT_NAME)
        self._since_snapshot = 0

    def close(self) -> None:
        self.write_snapshot()
        self.log.close()

    # -- reads ----------------------------------------------------------------

    def records(
        self,
        record_class: str | None = None,
        start: float | None = None,
        end: float | None = None,
    ) -> list[Record]:
        out = []
        for record in scan_log(self.log.path).records:
            if record_class is not None and record.record_class != record_class:
                continue
            if start is not None and record.timestamp < start:
                continue
            if end is not None and record.timestamp > end:
                continue
            out.append(record)
        return out

    def count(self, record_class: str | None = None) -> int:
        return len(self.records(record_class))


def bucket_means(
    points: Iterable[tuple[float, float]], buckets: int
) -> list[tuple[float, float]]:
    """Downsample (time, value) points into per-bucket means over the full
    time span; empty buckets are dropped."""
    pts = sorted(points)
    if not pts or buckets <= 0:
        return []
    t0, t1 = pts[0][0], pts[-1][0]
    if t1 == t0:
        return [(t0, sum(v for _, v in pts) / len(pts))]
    width = (t1 - t0) / buckets
    out = []
    grouped: dict[int, list[float]] = {}
    for t, v in pts:
        index = min(int((t - t0) / width), buckets - 1)
        grouped.setdefault(index, []).append(v)
    for index in sorted(grouped):
        mid = t0 + (index + 0.5) * width
        values = grouped[index]
        out.append((mid, sum(values) / len(values)))
    return out


def iter_class_rows(records: Iterable[Record]) -> Iterator[tuple[float, str, str]]:
    for record in records:
        yield record.timestamp, record.record_class, record.body
