"""Synthetic 2D datasets on [-1, 1]^2 and balanced train/test splits.

Sampling uses numpy's PCG64 generator seeded through ``SeedSequence``. Points
are drawn uniformly in fixed-size chunks and consumed in draw order, so a
given ``(kind, count_per_class, seed)`` always yields the same samples.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

KINDS = ("semicircles", "checkerboard", "circles", "corners", "checkerboard4")
NUM_CLASSES = {
    "semicircles": 2,
    "checkerboard": 2,
    "circles": 2,
    "corners": 2,
    "checkerboard4": 4,
}

_CHUNK = 256
_MAX_DRAWS = 10_000_000


def _label_semicircles(x: float, y: float) -> int | None:
    if math.hypot(x, y) > 0.95:
        return None
    return 0 if y >= 0 else 1


def _label_checkerboard(x: float, y: float) -> int | None:
    return 0 if (x >= 0) == (y >= 0) else 1


def _label_circles(x: float, y: float) -> int | None:
    r = math.hypot(x, y)
    if r <= 0.50:
        return 0
    if r <= 0.95:
        return 1
    return None


def _label_corners(x: float, y: float) -> int | None:
    cx = 1.0 if x >= 0 else -1.0
    cy = 1.0 if y >= 0 else -1.0
    return 1 if math.hypot(x - cx, y - cy) < 0.8 else 0


def _label_checkerboard4(x: float, y: float) -> int | None:
    upper = y >= 0
    right = x >= 0
    if upper:
        return 1 if right else 0
    return 3 if right else 2


LABELERS: dict[str, Callable[[float, float], int | None]] = {
    "semicircles": _label_semicircles,
    "checkerboard": _label_checkerboard,
    "circles": _label_circles,
    "corners": _label_corners,
    "checkerboard4": _label_checkerboard4,
}


def label_point(kind: str, x: float, y: float) -> int | None:
    """Class of ``(x, y)`` under ``kind``, or None if the point is rejected."""
    return LABELERS[_check_kind(kind)](x, y)


def _check_kind(kind: str) -> str:
    if kind not in LABELERS:
        raise ValueError(f"unknown dataset kind {kind!r}; choose from {', '.join(KINDS)}")
    return kind


@dataclass(frozen=True)
class Sample:
    x0: float
    x1: float
    label: int


def generate(kind: str, count_per_class: int, seed: int) -> list[Sample]:
    """Rejection-sample ``count_per_class`` points per class, returned in class blocks."""
    _check_kind(kind)
    if count_per_class < 1:
        raise ValueError("count_per_class must be >= 1")
    n_classes = NUM_CLASSES[kind]
    labeler = LABELERS[kind]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    buckets: list[list[Sample]] = [[] for _ in range(n_classes)]
    remaining = n_classes * count_per_class
    drawn = 0
    while remaining:
        for x, y in rng.uniform(-1.0, 1.0, size=(_CHUNK, 2)):
            label = labeler(float(x), float(y))
            if label is None or len(buckets[label]) >= count_per_class:
                continue
            buckets[label].append(Sample(float(x), float(y), label))
            remaining -= 1
            if not remaining:
                break
        drawn += _CHUNK
        if drawn > _MAX_DRAWS:
            raise RuntimeError("rejection sampling did not fill every class")
    return [s for bucket in buckets for s in bucket]


@dataclass(frozen=True)
class SplitSpec:
    kind: str
    seed: int
    n_train: int = 128
    n_test: int = 64

    def __post_init__(self) -> None:
        _check_kind(self.kind)
        n = NUM_CLASSES[self.kind]
        if self.n_train % n or self.n_test % n or self.n_train < n:
            raise ValueError(f"train/test sizes must be positive multiples of {n} classes")

    @property
    def num_classes(self) -> int:
        return NUM_CLASSES[self.kind]


@dataclass(frozen=True)
class Split:
    spec: SplitSpec
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray


def _as_arrays(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([(s.x0, s.x1) for s in samples], dtype=float).reshape(-1, 2)
    y = np.array([s.label for s in samples], dtype=int)
    return X, y


def make_split(spec: SplitSpec) -> Split:
    """Balanced split; the training part is class-blocked (class c fills block c).

    Each class draws ``n_train/C + n_test/C`` points; the first go to training.
    """
    n = spec.num_classes
    tr, te = spec.n_train // n, spec.n_test // n
    samples = generate(spec.kind, tr + te, spec.seed)
    train, test = [], []
    for c in range(n):
        block = samples[c * (tr + te):(c + 1) * (tr + te)]
        train += block[:tr]
        test += block[tr:]
    X_train, y_train = _as_arrays(train)
    X_test, y_test = _as_arrays(test)
    return Split(spec, X_train, y_train, X_test, y_test)


# --- text format ------------------------------------------------------------
# header: "# kind=<kind> seed=<seed> n_train=<n> n_test=<n> classes=<C>"
# body:   "x0 x1 label", training rows first, full round-trip precision


def dumps_split(split: Split) -> str:
    s = split.spec
    out = io.StringIO()
    out.write(
        f"# kind={s.kind} seed={s.seed} n_train={s.n_train} n_test={s.n_test} "
        f"classes={s.num_classes}\n"
    )
    for X, y in ((split.X_train, split.y_train), (split.X_test, split.y_test)):
        for (a, b), label in zip(X, y):
            out.write(f"{float(a)!r} {float(b)!r} {int(label)}\n")
    return out.getvalue()


def loads_split(text: str) -> Split:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing dataset header line")
    header = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    spec = SplitSpec(
        kind=header["kind"],
        seed=int(header["seed"]),
        n_train=int(header["n_train"]),
        n_test=int(header["n_test"]),
    )
    rows = [ln.split() for ln in lines[1:] if ln.strip()]
    if len(rows) != spec.n_train + spec.n_test:
        raise ValueError(f"expected {spec.n_train + spec.n_test} samples, found {len(rows)}")
    X = np.array([(float(a), float(b)) for a, b, _ in rows], dtype=float).reshape(-1, 2)
    y = np.array([int(c) for _, _, c in rows], dtype=int)
    k = spec.n_train
    return Split(spec, X[:k], y[:k], X[k:], y[k:])


def save_split(split: Split, path: str | Path) -> None:
    Path(path).write_text(dumps_split(split))


def load_split(path: str | Path) -> Split:
    return loads_split(Path(path).read_text())
