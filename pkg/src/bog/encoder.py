"""Coding frames to genre labels and pooling them into Bag-of-Genres histograms."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BoGError, InvalidInputError


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    genre: int
    frame_features: tuple

    def __post_init__(self):
        object.__setattr__(self, "frame_features", tuple(self.frame_features))


@dataclass(frozen=True, eq=False)
class BoGVector:
    video_id: str
    histogram: np.ndarray = field(repr=False)
    frame_count: int = 0

    def __post_init__(self):
        h = np.ascontiguousarray(self.histogram, dtype=np.float64)
        h.setflags(write=False)
        object.__setattr__(self, "histogram", h)

    def __len__(self):
        return self.histogram.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BoGVector):
            return NotImplemented
        return (
            self.video_id == other.video_id
            and self.frame_count == other.frame_count
            and np.array_equal(self.histogram, other.histogram)
        )

    __hash__ = None


def pool_labels(labels, G):
    """Normalized frequency histogram of hard genre assignments."""
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=G)
    return counts / labels.size


def encode_video(model, video):
    if not video.frame_features:
        raise InvalidInputError(f"video {video.video_id!r} has no frames")
    for f in video.frame_features:
        model.check_feature(f)
    X = np.vstack([f.values for f in video.frame_features])
    labels = model.predict_matrix(X)
    return BoGVector(video.video_id, pool_labels(labels, model.genre_set.G), len(labels))


def encode_corpus(model, videos, jobs=1):
    """Encode every video; failures are collected as ``(video_id, message)`` pairs.

    Output order follows the input order regardless of ``jobs``.
    """

    def one(video):
        try:
            return encode_video(model, video), None
        except BoGError as exc:
            return None, (video.video_id, str(exc))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, videos))
    else:
        results = [one(v) for v in videos]
    bogs = [b for b, _ in results if b is not None]
    errors = [e for _, e in results if e is not None]
    return bogs, errors


def bog_dimensionality(model):
    return model.genre_set.G


def write_bog_csv(bogs, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        G = len(bogs[0]) if bogs else 0
        writer.writerow(["video_id"] + [f"g{i}" for i in range(G)])
        for b in bogs:
            writer.writerow([b.video_id] + [repr(float(v)) for v in b.histogram])
