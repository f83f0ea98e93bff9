"""Time-tag stream I/O.

Binary format (little endian):
  header, 16 bytes: magic b"HHGT", format version u16 = 1, channel count u16,
  reserved u64 = 0; then packed 12-byte records {channel u8, pad u8[3],
  timestamp_ps i64}. Records are written sorted by (timestamp, channel).

CSV alternative: header line ``channel,timestamp_ps`` then one record per row.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataFormatError

MAGIC = b"HHGT"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sHHQ")

TAG_DTYPE = np.dtype(
    [("channel", "u1"), ("pad", "u1", (3,)), ("timestamp_ps", "<i8")]
)
assert TAG_DTYPE.itemsize == 12


@dataclass
class TagStream:
    """Parsed tag file: per-channel sorted timestamp arrays (int64 ps)."""

    channel_count: int
    by_channel: tuple[np.ndarray, ...]

    @property
    def n_records(self) -> int:
        return int(sum(ch.size for ch in self.by_channel))

    def channel(self, index: int) -> np.ndarray:
        if not (0 <= index < self.channel_count):
            raise DataFormatError(
                f"channel {index} outside declared set 0..{self.channel_count - 1}"
            )
        return self.by_channel[index]


def _split_channels(channels: np.ndarray, stamps: np.ndarray, channel_count: int):
    if channels.size and int(channels.max()) >= channel_count:
        raise DataFormatError(
            f"record channel {int(channels.max())} >= declared count {channel_count}"
        )
    return tuple(
        np.sort(stamps[channels == c]) for c in range(channel_count)
    )


def write_tags(path, by_channel, channel_count: int | None = None) -> None:
    """Write per-channel timestamp arrays as a binary tag file.

    Records are merged and sorted by (timestamp, channel) so identical inputs
    produce identical bytes.
    """
    by_channel = [np.asarray(ch, dtype=np.int64) for ch in by_channel]
    if channel_count is None:
        channel_count = len(by_channel)
    if channel_count < len(by_channel):
        raise DataFormatError("channel_count smaller than supplied channel list")
    n = sum(ch.size for ch in by_channel)
    rec = np.zeros(n, dtype=TAG_DTYPE)
    pos = 0
    for c, ch in enumerate(by_channel):
        rec["channel"][pos : pos + ch.size] = c
        rec["timestamp_ps"][pos : pos + ch.size] = ch
        pos += ch.size
    order = np.lexsort((rec["channel"], rec["timestamp_ps"]))
    rec = rec[order]
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, FORMAT_VERSION, channel_count, 0))
        f.write(rec.tobytes())


def read_tags(path) -> TagStream:
    """Read a binary tag file; timestamps are sorted within each channel."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise DataFormatError(f"{path}: shorter than the 16-byte header")
    magic, version, channel_count, _ = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DataFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported format version {version}")
    body = len(raw) - HEADER.size
    if body % TAG_DTYPE.itemsize:
        raise DataFormatError(f"{path}: truncated record ({body} bytes of body)")
    rec = np.frombuffer(raw, dtype=TAG_DTYPE, offset=HEADER.size)
    return TagStream(
        channel_count=channel_count,
        by_channel=_split_channels(rec["channel"], rec["timestamp_ps"], channel_count),
    )


def write_tags_csv(path, by_channel, channel_count: int | None = None) -> None:
    by_channel = [np.asarray(ch, dtype=np.int64) for ch in by_channel]
    if channel_count is None:
        channel_count = len(by_channel)
    rows = []
    for c, ch in enumerate(by_channel):
        rows.append(np.stack([np.full(ch.size, c, dtype=np.int64), ch], axis=1))
    allrows = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((allrows[:, 0], allrows[:, 1]))
    allrows = allrows[order]
    with open(path, "w") as f:
        f.write("channel,timestamp_ps\n")
        for c, t in allrows:
            f.write(f"{c},{t}\n")


def read_tags_csv(path, channel_count: int | None = None) -> TagStream:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    with open(path) as f:
        header = f.readline().strip()
    if header != "channel,timestamp_ps":
        raise DataFormatError(f"{path}: expected header 'channel,timestamp_ps'")
    if data.size == 0:
        data = np.empty((0, 2), dtype=np.int64)
    channels = data[:, 0].astype(np.int64)
    if channel_count is None:
        channel_count = int(channels.max()) + 1 if channels.size else 0
    return TagStream(
        channel_count=channel_count,
        by_channel=_split_channels(channels, data[:, 1], channel_count),
    )


def load_tags(path) -> TagStream:
    """Dispatch on extension: .csv reads the CSV variant, anything else binary."""
    if str(path).endswith(".csv"):
        return read_tags_csv(path)
    return read_tags(path)
