"""Binary feature cache (``BOGF``) shared by frame features and BoG vectors.

Layout, little-endian::

    "BOGF" | version u16 | kind u8 | descriptor u8 | dim u32 | config hash [32]
    | entry count u64 | entries... | CRC32 u32

Each entry is ``video_id`` (u16 length + UTF-8), ``index`` u32 and ``dim``
float64 values. For frame features ``index`` is the frame index; for BoG
files it carries the video's frame count. Entries are written sorted by
``(video_id, index)`` so equal contents give byte-identical files.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..binio import Reader, pack_floats, pack_string, split_crc, with_crc
from ..descriptors import Descriptor, FeatureVector
from ..encoder import BoGVector
from ..errors import FormatError, InvalidInputError

CACHE_MAGIC = b"BOGF"
CACHE_VERSION = 1
KIND_FEATURES = 0
KIND_BOG = 1


@dataclass
class FeatureCache:
    descriptor: Descriptor
    dim: int
    config_hash: bytes
    kind: int = KIND_FEATURES
    entries: dict = field(default_factory=dict)  # (video_id, index) -> float64 array

    def add(self, video_id, index, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.dim,):
            raise InvalidInputError(f"vector of length {values.shape} does not match cache dimension {self.dim}")
        self.entries[(video_id, int(index))] = values

    def __contains__(self, key):
        return key in self.entries

    def __len__(self):
        return len(self.entries)

    def frames_of(self, video_id):
        """Cached feature vectors of one video, ordered by frame index."""
        keys = sorted(k for k in self.entries if k[0] == video_id)
        return [FeatureVector(self.descriptor, self.entries[k]) for k in keys]

    def by_video(self):
        out = {}
        for (vid, idx) in sorted(self.entries):
            out.setdefault(vid, []).append(FeatureVector(self.descriptor, self.entries[(vid, idx)]))
        return out

    def to_bytes(self):
        head = CACHE_MAGIC + struct.pack("<HBBI", CACHE_VERSION, self.kind, int(self.descriptor), self.dim)
        parts = [head, self.config_hash, struct.pack("<Q", len(self.entries))]
        for vid, idx in sorted(self.entries):
            parts.append(pack_string(vid))
            parts.append(struct.pack("<I", idx))
            parts.append(pack_floats(self.entries[(vid, idx)]))
        return with_crc(b"".join(parts))

    @classmethod
    def from_bytes(cls, data, what="feature cache"):
        r = Reader(data, what)
        if r.take(4) != CACHE_MAGIC:
            r.pos = 0
            r.fail("bad magic, not a feature cache")
        version, kind, code, dim = r.unpack("HBBI")
        if version != CACHE_VERSION:
            r.fail(f"unsupported cache version {version}")
        if kind not in (KIND_FEATURES, KIND_BOG):
            r.fail(f"unknown cache kind {kind}")
        try:
            descriptor = Descriptor(code)
        except ValueError:
            r.fail(f"unknown descriptor code {code}")
        config_hash = r.take(32)
        count = r.unpack("Q")
        cache = cls(descriptor, dim, config_hash, kind)
        for _ in range(count):
            vid = r.string()
            idx = r.unpack("I")
            cache.entries[(vid, idx)] = r.floats(dim)
        if len(data) - r.pos != 4:
            r.fail(f"{len(data) - r.pos - 4} unexpected bytes before CRC trailer")
        split_crc(bytes(data), what)
        return cache

    def save(self, path):
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(self.to_bytes())
        os.replace(tmp, path)

    @classmethod
    def load(cls, path):
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc}") from exc
        return cls.from_bytes(data, what=str(path))


def bogs_to_cache(bogs, descriptor, config_hash):
    dim = len(bogs[0]) if bogs else 0
    cache = FeatureCache(descriptor, dim, config_hash, KIND_BOG)
    for b in bogs:
        cache.add(b.video_id, b.frame_count, b.histogram)
    return cache


def cache_to_bogs(cache):
    if cache.kind != KIND_BOG:
        raise InvalidInputError("file holds frame features, not BoG vectors")
    return [BoGVector(vid, cache.entries[(vid, n)], n) for vid, n in sorted(cache.entries)]
