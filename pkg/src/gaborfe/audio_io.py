"""Mono 16-bit PCM WAV reading/writing and dataset manifests.

The WAV codec is deliberately minimal and strict: RIFF/WAVE, format tag 1
(integer PCM), one channel, 16 bits.  Everything else raises
:class:`UnsupportedFormatError`; structurally broken files raise
:class:`ParseError`.  Samples map to float64 in [-1, 1) as ``value / 32768``,
and writing rounds back to the nearest representable level, so reading a
written file reproduces representable samples exactly.

Manifests are CSV files ``path,label,split`` listing one recording per row;
splits are restricted to train/valid/test/adapt and paths must be unique.
"""

import csv
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UnsupportedFormatError",
    "ParseError",
    "ManifestRow",
    "Manifest",
    "read_wav",
    "write_wav",
    "load_manifest",
    "SPLITS",
]

SPLITS = ("train", "valid", "test", "adapt")


class ParseError(ValueError):
    """A file is structurally malformed (bad header, truncated data, ...)."""


class UnsupportedFormatError(ValueError):
    """A file is well-formed but uses a format this library does not read."""


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------


def _read_chunks(blob: bytes):
    """Yield (chunk_id, payload) pairs of a RIFF body, validating sizes."""
    pos = 12
    while pos < len(blob):
        if pos + 8 > len(blob):
            raise ParseError("truncated chunk header")
        chunk_id = blob[pos : pos + 4]
        (size,) = struct.unpack_from("<I", blob, pos + 4)
        start = pos + 8
        if start + size > len(blob):
            raise ParseError(
                f"chunk {chunk_id!r} declares {size} bytes but the file ends early"
            )
        yield chunk_id, blob[start : start + size]
        pos = start + size + (size & 1)  # chunks are word-aligned


def read_wav(path):
    """Read a mono 16-bit PCM WAV file.

    Returns ``(samples, sample_rate)`` with float64 samples in [-1, 1).
    Raises :class:`ParseError` for malformed files and
    :class:`UnsupportedFormatError` for compressed, multi-channel or
    non-16-bit data.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise ParseError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    data = None
    for chunk_id, payload in _read_chunks(blob):
        if chunk_id == b"fmt " and fmt is None:
            if len(payload) < 16:
                raise ParseError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", payload, 0)
        elif chunk_id == b"data" and data is None:
            data = payload
    if fmt is None:
        raise ParseError(f"{path}: missing fmt chunk")
    if data is None:
        raise ParseError(f"{path}: missing data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormatError(
            f"{path}: only integer PCM is supported (format tag {audio_format})"
        )
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: only mono is supported ({channels} channels)")
    if bits != 16:
        raise UnsupportedFormatError(f"{path}: only 16-bit samples are supported ({bits} bits)")
    if len(data) % 2 != 0:
        raise ParseError(f"{path}: data chunk has an odd byte count")
    samples = np.frombuffer(data, dtype="<i2").astype(float) / 32768.0
    return samples, int(sample_rate)


def write_wav(path, samples, sample_rate):
    """Write a mono 16-bit PCM WAV file; values are clipped to [-1, 1)."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise ValueError("samples must be a 1-D array")
    if int(sample_rate) != sample_rate or sample_rate <= 0:
        raise ValueError("sample_rate must be a positive integer")
    sample_rate = int(sample_rate)
    quantized = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
    payload = quantized.tobytes()
    header = b"".join(
        [
            b"RIFF",
            struct.pack("<I", 36 + len(payload)),
            b"WAVE",
            b"fmt ",
            struct.pack("<IHHIIHH", 16, 1, 1, sample_rate, sample_rate * 2, 2, 16),
            b"data",
            struct.pack("<I", len(payload)),
        ]
    )
    with open(path, "wb") as fh:
        fh.write(header + payload)


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifestRow:
    path: str
    label: str
    split: str


@dataclass
class Manifest:
    """Validated recording list; every path unique, every split known."""

    rows: list

    def paths(self, split=None) -> list:
        return [r.path for r in self.rows if split is None or r.split == split]

    def for_split(self, split) -> list:
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}; expected one of {SPLITS}")
        return [r for r in self.rows if r.split == split]

    @property
    def labels(self) -> list:
        """Sorted unique labels across all rows."""
        return sorted({r.label for r in self.rows})


def load_manifest(path) -> Manifest:
    """Parse and validate a ``path,label,split`` manifest CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty manifest") from None
        if [h.strip() for h in header] != ["path", "label", "split"]:
            raise ParseError(f"{path}: manifest header must be path,label,split")
        rows = []
        seen = set()
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 columns, got {len(cells)}")
            wav_path, label, split = (c.strip() for c in cells)
            if not wav_path or not label:
                raise ParseError(f"{path}:{lineno}: empty path or label")
            if split not in SPLITS:
                raise ParseError(
                    f"{path}:{lineno}: unknown split {split!r}; expected one of {SPLITS}"
                )
            if wav_path in seen:
                raise ParseError(f"{path}:{lineno}: duplicate path {wav_path!r}")
            seen.add(wav_path)
            rows.append(ManifestRow(wav_path, label, split))
    return Manifest(rows)
