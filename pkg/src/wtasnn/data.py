"""Event-stream ingestion, preprocessing, encodings, and synthetic tasks.

Canonical event file format: UTF-8 text, one event per line as
``timestamp_us,x,y,polarity`` with polarity in {-1, +1}; ``#`` starts a
comment.  Preprocessing sums raw event counts over time windows (and
optionally over pixel blocks) and takes a single sign at the end, so the
order of the spatial and temporal sums does not matter.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .mathcore import SILENCE


@dataclass(frozen=True)
class EventRecord:
    timestamp_us: int
    x: int
    y: int
    polarity: int


@dataclass
class EncodedSequence:
    """T x N spike symbols (0 = silence, c = unit index) plus circuit sizes."""

    symbols: np.ndarray  # (T, N) uint8
    sizes: Tuple[int, ...]
    label: Optional[int] = None

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=np.uint8)
        if self.symbols.ndim != 2 or self.symbols.shape[1] != len(self.sizes):
            raise ValueError("symbols must be (T, N) with one size per circuit")
        for n, c in enumerate(self.sizes):
            if self.symbols[:, n].max(initial=0) > c:
                raise ValueError(f"symbol out of range for circuit {n} (C={c})")


def load_events(path) -> List[EventRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 comma-separated fields")
            try:
                t, x, y, pol = (int(p) for p in parts)
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: non-integer field") from err
            if pol not in (-1, 1):
                raise ValueError(f"{path}:{lineno}: polarity must be -1 or +1")
            if x < 0 or y < 0:
                raise ValueError(f"{path}:{lineno}: negative pixel coordinate")
            records.append(EventRecord(t, x, y, pol))
    records.sort(key=lambda r: r.timestamp_us)
    return records


def write_events(path, events: Sequence[EventRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(f"{e.timestamp_us},{e.x},{e.y},{e.polarity}\n")


def bin_event_counts(events: Sequence[EventRecord], period_us: int, T: int,
                     width: int, height: int) -> np.ndarray:
    """Summed polarities per pixel and window; events beyond T windows are
    dropped (cropping)."""
    if period_us <= 0:
        raise ValueError("period must be positive")
    counts = np.zeros((T, height, width), dtype=np.int64)
    for e in events:
        k = e.timestamp_us // period_us
        if k >= T:
            continue
        if e.x >= width or e.y >= height:
            raise ValueError(f"event at ({e.x}, {e.y}) outside {width}x{height} frame")
        counts[k, e.y, e.x] += e.polarity
    return counts


def bin_events(events: Sequence[EventRecord], period_us: int, T: int,
               width: int, height: int) -> np.ndarray:
    """Signed frames: the sign of the per-window polarity sum (0 on ties)."""
    return np.sign(bin_event_counts(events, period_us, T, width, height)).astype(np.int8)


def spatial_pool(count_frames: np.ndarray, factor: int = 2) -> np.ndarray:
    """Block-sum pre-sign count frames over factor x factor pixel blocks,
    then take the sign."""
    T, h, w = count_frames.shape
    if h % factor or w % factor:
        raise ValueError(f"{h}x{w} frames not divisible by pooling factor {factor}")
    pooled = count_frames.reshape(T, h // factor, factor, w // factor, factor).sum(axis=(2, 4))
    return np.sign(pooled).astype(np.int8)


def preprocess_events(events: Sequence[EventRecord], period_us: int, T: int,
                      width: int, height: int, pool: int = 1) -> np.ndarray:
    """Full pipeline: temporal sums, optional spatial pooling, one sign."""
    counts = bin_event_counts(events, period_us, T, width, height)
    if pool > 1:
        return spatial_pool(counts, pool)
    return np.sign(counts).astype(np.int8)


def _flat(frames: np.ndarray) -> np.ndarray:
    return frames.reshape(frames.shape[0], -1)


def encode_wta(frames: np.ndarray, label: Optional[int] = None) -> EncodedSequence:
    """One C=2 circuit per pixel: -1 -> unit 1, +1 -> unit 2, 0 -> silence."""
    f = _flat(frames)
    symbols = np.zeros(f.shape, dtype=np.uint8)
    symbols[f < 0] = 1
    symbols[f > 0] = 2
    return EncodedSequence(symbols, (2,) * f.shape[1], label)


def decode_wta(seq: EncodedSequence, height: int, width: int) -> np.ndarray:
    frames = np.zeros(seq.symbols.shape, dtype=np.int8)
    frames[seq.symbols == 1] = -1
    frames[seq.symbols == 2] = 1
    return frames.reshape(-1, height, width)


def encode_unsigned(frames: np.ndarray, label: Optional[int] = None) -> EncodedSequence:
    """One C=1 circuit per pixel; any event spikes, sign discarded."""
    f = _flat(frames)
    return EncodedSequence((f != 0).astype(np.uint8), (1,) * f.shape[1], label)


def encode_per_sign(frames: np.ndarray, label: Optional[int] = None) -> EncodedSequence:
    """Two C=1 circuits per pixel: channel 2p spikes on -1, 2p+1 on +1."""
    f = _flat(frames)
    T, n = f.shape
    symbols = np.zeros((T, 2 * n), dtype=np.uint8)
    symbols[:, 0::2] = f < 0
    symbols[:, 1::2] = f > 0
    return EncodedSequence(symbols, (1,) * (2 * n), label)


ENCODERS = {"wta": encode_wta, "unsigned": encode_unsigned, "per_sign": encode_per_sign}


def save_encoded(path, seq: EncodedSequence) -> None:
    """Flat binary cache: '<II' T, N header, N uint8 circuit sizes, then
    T*N symbol bytes row-major."""
    T, n = seq.symbols.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", T, n))
        fh.write(bytes(seq.sizes))
        fh.write(seq.symbols.tobytes())


def load_encoded(path) -> EncodedSequence:
    with open(path, "rb") as fh:
        T, n = struct.unpack("<II", fh.read(8))
        sizes = tuple(fh.read(n))
        body = fh.read(T * n)
    symbols = np.frombuffer(body, dtype=np.uint8).reshape(T, n)
    return EncodedSequence(symbols.copy(), sizes)


def read_manifest(path) -> List[Tuple[Path, int]]:
    """Manifest: one ``relative/path,label`` per line, paths relative to the
    manifest's directory; ``#`` comments allowed."""
    base = Path(path).parent
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rel, label = line.rsplit(",", 1)
                out.append((base / rel, int(label)))
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: expected 'path,label'") from err
    return out


def write_manifest(path, entries: Sequence[Tuple[str, int]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rel, label in entries:
            fh.write(f"{rel},{label}\n")


def frames_to_events(frames: np.ndarray, period_us: int) -> List[EventRecord]:
    """One event per nonzero pixel-step, timestamped mid-window."""
    events = []
    T, h, w = frames.shape
    for t in range(T):
        ys, xs = np.nonzero(frames[t])
        for y, x in zip(ys, xs):
            events.append(EventRecord(t * period_us + period_us // 2, int(x), int(y),
                                      int(frames[t, y, x])))
    return events


def synth_polarity_task(n_pixels: int, T: int, n_classes: int, seed: int,
                        n_train_per_class: int = 100, n_test_per_class: int = 20,
                        event_rate: float = 0.3,
                        ) -> Tuple[list, list, np.ndarray]:
    """Classes share identical event timing masks and differ only in a fixed
    per-pixel polarity assignment, so the unsigned encoding destroys all
    class information by construction.

    Returns (train, test, patterns) where each split is a list of
    ((T, 1, n_pixels) signed frames, label) and patterns is the
    (n_classes, n_pixels) polarity matrix.
    """
    if n_classes < 2:
        raise ValueError("need at least two classes")
    rng = np.random.default_rng(seed)
    while True:
        patterns = rng.choice([-1, 1], size=(n_classes, n_pixels))
        diffs = [np.any(patterns[a] != patterns[b])
                 for a in range(n_classes) for b in range(a + 1, n_classes)]
        if all(diffs):
            break

    def differing_pixels(a: int, b: int) -> np.ndarray:
        return np.nonzero(patterns[a] != patterns[b])[0]

    def make_split(n_per_class: int) -> list:
        examples = []
        for _ in range(n_per_class):
            while True:
                mask = rng.random((T, n_pixels)) < event_rate
                ok = all(mask[:, differing_pixels(a, b)].any()
                         for a in range(n_classes) for b in range(a + 1, n_classes))
                if ok:
                    break
            for c in range(n_classes):
                frames = (mask * patterns[c]).astype(np.int8).reshape(T, 1, n_pixels)
                examples.append((frames, c))
        return examples

    return make_split(n_train_per_class), make_split(n_test_per_class), patterns


def write_synth_dataset(out_dir, n_pixels: int, T: int, n_classes: int, seed: int,
                        n_train_per_class: int, n_test_per_class: int,
                        period_us: int = 1000, event_rate: float = 0.3) -> dict:
    """Materialize the synthetic task as event files plus manifests."""
    out_dir = Path(out_dir)
    train, test, _ = synth_polarity_task(n_pixels, T, n_classes, seed,
                                         n_train_per_class, n_test_per_class,
                                         event_rate)
    meta = {"n_pixels": n_pixels, "T": T, "n_classes": n_classes,
            "period_us": period_us, "width": n_pixels, "height": 1}
    for split, examples in (("train", train), ("test", test)):
        split_dir = out_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        entries = []
        for idx, (frames, label) in enumerate(examples):
            name = f"{split}/ex_{idx:05d}.csv"
            write_events(out_dir / name, frames_to_events(frames, period_us))
            entries.append((name, label))
        write_manifest(out_dir / f"{split}_manifest.txt", entries)
    return meta


def load_example(path, period_us: int, T: int, width: int, height: int,
                 pool: int, encoding: str, label: Optional[int] = None) -> EncodedSequence:
    frames = preprocess_events(load_events(path), period_us, T, width, height, pool)
    return ENCODERS[encoding](frames, label)
