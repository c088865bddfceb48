"""Desk-scale synthetic video corpus whose genres are separable by color.

Every genre owns a dominant color at the centre of a 4-per-channel
quantization cell. With noise level ``nu`` each video gets a color offset
(std ``40*nu``), each pixel Gaussian jitter (std ``128*nu``), and each frame
one to three rectangles or ellipses painted in another genre's color that
cover up to ``2*nu`` of the frame. At ``nu = 0`` all frames of a genre are
identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from ..errors import InvalidInputError
from .manifest import ManifestEntry, write_manifest


def genre_color(g):
    cell = (g * 23) % 64
    bins = np.array([cell // 16, (cell // 4) % 4, cell % 4])
    return 32 + 64 * bins


def genre_name(g):
    return f"genre{g:02d}"


def render_frame(rng, g, n_genres, offset, noise, size):
    img = np.empty((size, size, 3), dtype=np.float64)
    img[:] = genre_color(g) + offset
    if noise > 0:
        yy, xx = np.mgrid[0:size, 0:size]
        budget = min(0.9, 2.0 * noise) * rng.uniform() * size * size
        for _ in range(int(rng.integers(1, 4))):
            other = int(rng.integers(n_genres - 1))
            other += other >= g
            area = budget / 3.0
            h = max(1, int(np.sqrt(area * rng.uniform(0.5, 2.0))))
            w = max(1, int(area / h))
            h, w = min(h, size), min(w, size)
            y0 = int(rng.integers(0, size - h + 1))
            x0 = int(rng.integers(0, size - w + 1))
            if rng.uniform() < 0.5:
                mask = (yy >= y0) & (yy < y0 + h) & (xx >= x0) & (xx < x0 + w)
            else:
                cy, cx = y0 + h / 2.0, x0 + w / 2.0
                mask = ((yy + 0.5 - cy) / (h / 2.0)) ** 2 + ((xx + 0.5 - cx) / (w / 2.0)) ** 2 <= 1.0
            img[mask] = genre_color(other)
        img += rng.normal(0.0, 128.0 * noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def generate(out_dir, genres=6, videos=20, frames=20, noise=0.1, seed=0, size=32, test_fraction=0.64, force=False):
    """Write frame PNGs and ``manifest.csv`` under ``out_dir``; returns the manifest path."""
    if min(genres, videos, frames, size) < 1:
        raise InvalidInputError("genre, video, frame counts and size must be >= 1")
    if genres < 2:
        raise InvalidInputError("at least two genres are required")
    if genres > 64:
        raise InvalidInputError("at most 64 distinct genre colors are available")
    if not 0.0 <= noise:
        raise InvalidInputError("noise must be >= 0")
    if not 0.0 < test_fraction < 1.0:
        raise InvalidInputError("test_fraction must lie in (0, 1)")
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()) and not force:
        raise InvalidInputError(f"output directory {out} is not empty; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)
    n_test = min(videos - 1, max(1, int(round(videos * test_fraction)))) if videos > 1 else 0
    entries = []
    root = np.random.SeedSequence(seed)
    video_seeds = root.spawn(genres * videos)
    for g in range(genres):
        for v in range(videos):
            rng = np.random.default_rng(video_seeds[g * videos + v])
            vid = f"{genre_name(g)}_v{v:03d}"
            split = "train" if v < videos - n_test else "test"
            frame_dir = out / "frames" / vid
            frame_dir.mkdir(parents=True, exist_ok=True)
            offset = rng.normal(0.0, 40.0 * noise, 3) if noise > 0 else np.zeros(3)
            for f in range(frames):
                px = render_frame(rng, g, genres, offset, noise, size)
                PILImage.fromarray(px, "RGB").save(frame_dir / f"frame_{f:06d}.png")
            entries.append(ManifestEntry(vid, genre_name(g), split, frame_dir))
    manifest = out / "manifest.csv"
    write_manifest(entries, manifest)
    return manifest
