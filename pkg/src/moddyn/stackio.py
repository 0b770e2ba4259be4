"""File formats: REPSTK1 representation stacks, dataset manifests, score files.

REPSTK1 layout (all little-endian):

    bytes 0-7    magic "REPSTK1\\0"
    bytes 8-11   uint32 layer count L
    bytes 12-15  uint32 feature count F
    bytes 16-19  uint32 time count T
    bytes 20-23  float32 frame rate in Hz
    bytes 24-31  reserved, zero
    bytes 32-    L*F*T float32 values, value (l, f, t) at offset
                 32 + 4 * ((l*F + f)*T + t)

Manifests and score files are comma-separated UTF-8 text with a header row.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptionError, FormatError, ParseError, ValidationError

REPSTK_MAGIC = b"REPSTK1\x00"
REPSTK_HEADER_SIZE = 32

MANIFEST_HEADER = ["id", "path", "label", "attack_id", "split"]
SCORES_HEADER = ["id", "score", "label"]

LABELS = ("bonafide", "spoof")
SPLITS = ("train", "valid", "eval")


def _atomic_write_bytes(path: Path, payload: bytes) -> None:
    # write-then-rename so readers never observe a partial file
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


@dataclass
class RepresentationStack:
    """Encoder output tensor: (layers, features, time) at a fixed frame rate.

    Values are stored as float32, the on-disk precision, so a write/read
    round trip is bit-exact.
    """

    data: np.ndarray
    frame_rate: float

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float32)
        self.frame_rate = float(self.frame_rate)

    @property
    def layers(self) -> int:
        return self.data.shape[0]

    @property
    def features(self) -> int:
        return self.data.shape[1]

    @property
    def time_steps(self) -> int:
        return self.data.shape[2]

    def validate(self) -> None:
        if self.data.ndim != 3:
            raise ValidationError(
                f"stack data must be 3-D (layers, features, time), got shape {self.data.shape}"
            )
        if min(self.data.shape) < 1:
            raise ValidationError(f"stack dims must all be >= 1, got {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise ValidationError("stack contains non-finite values")
        if not (np.isfinite(self.frame_rate) and self.frame_rate > 0):
            raise ValidationError(f"frame_rate must be a positive real, got {self.frame_rate}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RepresentationStack):
            return NotImplemented
        return (
            self.frame_rate == other.frame_rate
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )


def write_stack(stack: RepresentationStack, path: str | Path) -> None:
    """Write a validated stack to `path` in the REPSTK1 format."""
    stack.validate()
    header = REPSTK_MAGIC + struct.pack(
        "<IIIf8x", stack.layers, stack.features, stack.time_steps, stack.frame_rate
    )
    payload = np.ascontiguousarray(stack.data, dtype="<f4").tobytes()
    _atomic_write_bytes(Path(path), header + payload)


def read_stack(path: str | Path) -> RepresentationStack:
    """Read a REPSTK1 file, checking magic, header and payload size."""
    raw = Path(path).read_bytes()
    if len(raw) < REPSTK_HEADER_SIZE:
        raise FormatError(f"{path}: file shorter than the {REPSTK_HEADER_SIZE}-byte header")
    if raw[:8] != REPSTK_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:8]!r}")
    layers, features, time_steps, frame_rate = struct.unpack("<IIIf", raw[8:24])
    expected = REPSTK_HEADER_SIZE + 4 * layers * features * time_steps
    if len(raw) != expected:
        raise CorruptionError(
            f"{path}: header declares {layers}x{features}x{time_steps} "
            f"({expected} bytes total) but file has {len(raw)} bytes"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=REPSTK_HEADER_SIZE).reshape(
        layers, features, time_steps
    )
    stack = RepresentationStack(data=data.copy(), frame_rate=frame_rate)
    stack.validate()
    return stack


@dataclass
class ManifestEntry:
    id: str
    path: str
    label: str
    attack_id: str
    split: str


@dataclass
class DatasetManifest:
    """Ordered utterance list; `root` anchors relative stack paths."""

    entries: list[ManifestEntry] = field(default_factory=list)
    root: Path | None = None

    def split_entries(self, split: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == split]

    def stack_path(self, entry: ManifestEntry) -> Path:
        p = Path(entry.path)
        if not p.is_absolute() and self.root is not None:
            p = self.root / p
        return p

    def validate_paths(self) -> None:
        missing = [e.id for e in self.entries if not self.stack_path(e).is_file()]
        if missing:
            raise ValidationError(f"manifest paths not resolvable for ids: {', '.join(missing)}")


def read_manifest(path: str | Path) -> DatasetManifest:
    """Parse a manifest table; errors name the offending line."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != MANIFEST_HEADER:
        raise ParseError(f"{path}:1: expected header {','.join(MANIFEST_HEADER)}")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        uid, p, label, attack_id, split = (c.strip() for c in row)
        if label not in LABELS:
            raise ParseError(f"{path}:{lineno}: unknown label {label!r}")
        if split not in SPLITS:
            raise ParseError(f"{path}:{lineno}: unknown split {split!r}")
        if uid in seen:
            raise ParseError(f"{path}:{lineno}: duplicate id {uid!r}")
        seen.add(uid)
        entries.append(ManifestEntry(id=uid, path=p, label=label, attack_id=attack_id, split=split))
    return DatasetManifest(entries=entries, root=path.parent)


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    lines = [",".join(MANIFEST_HEADER)]
    for e in manifest.entries:
        lines.append(f"{e.id},{e.path},{e.label},{e.attack_id},{e.split}")
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


@dataclass
class ScoreRecord:
    id: str
    score: float
    label: str


@dataclass
class ScoreSet:
    items: list[ScoreRecord] = field(default_factory=list)

    def labels(self) -> list[str]:
        return [r.label for r in self.items]

    def scores(self) -> np.ndarray:
        return np.array([r.score for r in self.items], dtype=np.float64)


def _check_score(value: float, where: str, exc: type[Exception] = ParseError) -> float:
    value = float(value)
    if not (np.isfinite(value) and 0.0 < value < 1.0):
        raise exc(f"{where}: score {value!r} outside the open interval (0,1)")
    return value


def read_scores(path: str | Path) -> ScoreSet:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != SCORES_HEADER:
        raise ParseError(f"{path}:1: expected header {','.join(SCORES_HEADER)}")
    items: list[ScoreRecord] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
        uid, score_text, label = (c.strip() for c in row)
        try:
            score = float(score_text)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: score {score_text!r} is not a decimal real")
        score = _check_score(score, f"{path}:{lineno}")
        if label not in LABELS:
            raise ParseError(f"{path}:{lineno}: unknown label {label!r}")
        if uid in seen:
            raise ParseError(f"{path}:{lineno}: duplicate id {uid!r}")
        seen.add(uid)
        items.append(ScoreRecord(id=uid, score=score, label=label))
    return ScoreSet(items=items)


def write_scores(scores: ScoreSet, path: str | Path) -> None:
    lines = [",".join(SCORES_HEADER)]
    for r in scores.items:
        score = _check_score(r.score, r.id, ValidationError)
        lines.append(f"{r.id},{score!r},{r.label}")
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")
