"""Dataset manifests: ``video_id,genre,split,frame_dir`` CSV files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from ..classifier import GenreSet
from ..errors import FormatError, InvalidInputError

SPLITS = ("train", "test")
FRAME_SUFFIXES = (".png", ".jpg", ".jpeg")
HEADER = ["video_id", "genre", "split", "frame_dir"]


@dataclass(frozen=True)
class ManifestEntry:
    video_id: str
    genre: str
    split: str
    frame_dir: Path


@dataclass(frozen=True)
class DatasetManifest:
    genres: GenreSet
    videos: tuple

    def split(self, name):
        if name == "all":
            return list(self.videos)
        return [v for v in self.videos if v.split == name]

    def genre_index(self, entry):
        return self.genres.index(entry.genre)

    def by_id(self):
        return {v.video_id: v for v in self.videos}


def load_manifest(path, check_dirs=True):
    """Parse a manifest; relative frame directories resolve against the manifest's folder.

    Genre indices follow the sorted genre names.
    """
    path = Path(path)
    base = path.parent
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise FormatError(f"cannot read manifest {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != HEADER:
            raise FormatError(f"manifest {path}: header must be {','.join(HEADER)}")
        entries = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            vid = row["video_id"].strip()
            genre = row["genre"].strip()
            split = row["split"].strip()
            if not vid or not genre:
                raise InvalidInputError(f"manifest {path}:{lineno}: empty video_id or genre")
            if vid in seen:
                raise InvalidInputError(f"manifest {path}:{lineno}: duplicate video_id {vid!r}")
            if split not in SPLITS:
                raise InvalidInputError(f"manifest {path}:{lineno}: split must be train or test, got {split!r}")
            frame_dir = Path(row["frame_dir"].strip())
            if not frame_dir.is_absolute():
                frame_dir = base / frame_dir
            if check_dirs and not frame_dir.is_dir():
                raise InvalidInputError(f"manifest {path}:{lineno}: frame_dir {frame_dir} does not exist")
            seen.add(vid)
            entries.append(ManifestEntry(vid, genre, split, frame_dir))
    if not entries:
        raise InvalidInputError(f"manifest {path} lists no videos")
    genres = GenreSet(tuple(sorted({e.genre for e in entries})))
    return DatasetManifest(genres, tuple(entries))


def write_manifest(entries, path):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        for e in entries:
            frame_dir = Path(e.frame_dir)
            try:
                frame_dir = frame_dir.relative_to(path.parent)
            except ValueError:
                pass
            w.writerow([e.video_id, e.genre, e.split, frame_dir.as_posix()])


def list_frames(frame_dir):
    """Frame image files in lexicographic (zero-padded index) order."""
    return sorted(p for p in Path(frame_dir).iterdir() if p.suffix.lower() in FRAME_SUFFIXES and p.is_file())
