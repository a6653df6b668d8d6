"""Eigenvalue archives: (samples, N) arrays of ascending spectra with a
label, persisted as CSV (17 significant digits, lossless round-trip) or as
a raw binary with magic ``WLAB1``, little-endian u64 N, u64 samples, then
the float64 payload (bit-exact round-trip).
"""

import os
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"WLAB1"


class ArchiveFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Archive:
    N: int
    label: str
    data: np.ndarray  # (samples, N), each row ascending

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] != self.N:
            raise ArchiveFormatError("data shape does not match N")
        if data.shape[1] > 1 and np.any(np.diff(data, axis=1) < 0):
            raise ArchiveFormatError("archive rows must be ascending")
        object.__setattr__(self, "data", data)

    @property
    def samples(self):
        return self.data.shape[0]


def save_archive(archive, path):
    """Write CSV (default) or raw binary when the path ends in .bin."""
    if str(path).endswith(".bin"):
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", archive.N, archive.samples))
            fh.write(archive.data.astype("<f8").tobytes())
        return
    with open(path, "w") as fh:
        fh.write(f"{archive.N},{archive.samples},{archive.label}\n")
        for row in archive.data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_archive(path):
    """Read an archive in either format, validating header consistency."""
    if str(path).endswith(".bin"):
        with open(path, "rb") as fh:
            magic = fh.read(5)
            if magic != MAGIC:
                raise ArchiveFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
            n, samples = struct.unpack("<QQ", fh.read(16))
            payload = fh.read()
        data = np.frombuffer(payload, dtype="<f8")
        if data.size != n * samples:
            raise ArchiveFormatError("binary payload size does not match header")
        return Archive(N=int(n), label=os.path.splitext(os.path.basename(path))[0], data=data.reshape(samples, n).copy())

    with open(path) as fh:
        header = fh.readline().strip()
        parts = header.split(",")
        if len(parts) != 3:
            raise ArchiveFormatError(f"malformed header line: {header!r}")
        try:
            n, samples = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ArchiveFormatError(f"malformed header line: {header!r}") from exc
        label = parts[2]
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            row = np.array(line.split(","), dtype=float)
            if len(row) != n:
                raise ArchiveFormatError(f"line {lineno}: expected {n} values, got {len(row)}")
            rows.append(row)
    if len(rows) != samples:
        raise ArchiveFormatError(f"header promised {samples} samples, file has {len(rows)}")
    return Archive(N=n, label=label, data=np.array(rows))
