"""Global color and texture descriptors for single video frames.

All extractors are pure functions of ``(Image, DescriptorConfig)`` and return a
:class:`FeatureVector` whose length depends only on the descriptor and config.
Color quantization is uniform per channel: ``floor(v * bins / 256)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, InvalidInputError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)

# Polar grid used by GFD before the 2-D transform.
GFD_POLAR_RADIAL = 64
GFD_POLAR_ANGULAR = 64


class Descriptor(enum.IntEnum):
    """Descriptor identity; the integer value is the on-disk enum code."""

    ACC = 0
    CCV = 1
    BIC = 2
    GCH = 3
    GFD = 4
    HWD = 5

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        if isinstance(name, int):
            try:
                return cls(name)
            except ValueError:
                raise InvalidInputError(f"unknown descriptor code {name}") from None
        try:
            return cls[str(name).strip().upper()]
        except KeyError:
            raise InvalidInputError(f"unknown descriptor {name!r}; expected one of {[d.name for d in cls]}") from None


class Image:
    """An RGB8 raster stored as a read-only ``(height, width, 3)`` uint8 array."""

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim == 2:
            arr = np.repeat(arr[:, :, None], 3, axis=2)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidInputError(f"expected an (H, W, 3) pixel array, got shape {arr.shape}")
        if arr.shape[0] == 0 or arr.shape[1] == 0:
            raise InvalidInputError("image has zero area")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise InvalidInputError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.array(arr, dtype=np.uint8, copy=True)
        arr.setflags(write=False)
        self.pixels = arr

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    def at(self, x, y):
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise IndexError(f"pixel ({x}, {y}) outside {self.width}x{self.height} image")
        return tuple(int(v) for v in self.pixels[y, x])

    @classmethod
    def from_file(cls, path):
        from PIL import Image as PILImage

        with PILImage.open(Path(path)) as im:
            return cls(np.asarray(im.convert("RGB")))

    def __repr__(self):
        return f"Image({self.width}x{self.height})"


@dataclass(frozen=True)
class DescriptorConfig:
    gch_bins_per_channel: int = 4
    bic_bins_per_channel: int = 4
    ccv_bins_per_channel: int = 4
    ccv_tau_fraction: float = 0.01
    acc_distances: tuple = (1, 3, 5, 7)
    acc_bins_per_channel: int = 4
    gfd_radial: int = 4
    gfd_angular: int = 9
    gfd_resize: int = 64
    hwd_levels: int = 3
    hwd_resize: int = 64

    def __post_init__(self):
        object.__setattr__(self, "acc_distances", tuple(int(d) for d in self.acc_distances))
        counts = {
            "gch_bins_per_channel": self.gch_bins_per_channel,
            "bic_bins_per_channel": self.bic_bins_per_channel,
            "ccv_bins_per_channel": self.ccv_bins_per_channel,
            "acc_bins_per_channel": self.acc_bins_per_channel,
            "gfd_radial": self.gfd_radial,
            "gfd_angular": self.gfd_angular,
            "gfd_resize": self.gfd_resize,
            "hwd_levels": self.hwd_levels,
            "hwd_resize": self.hwd_resize,
        }
        for name, value in counts.items():
            if int(value) != value or value < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {value!r}")
        for name in ("gch_bins_per_channel", "bic_bins_per_channel", "ccv_bins_per_channel", "acc_bins_per_channel"):
            if getattr(self, name) > 256:
                raise ConfigError(f"{name} must be <= 256")
        if not self.acc_distances or min(self.acc_distances) < 1:
            raise ConfigError("acc_distances must be a nonempty list of integers >= 1")
        if not 0.0 < self.ccv_tau_fraction < 1.0:
            raise ConfigError(f"ccv_tau_fraction must lie in (0, 1), got {self.ccv_tau_fraction}")
        if self.gfd_radial > GFD_POLAR_RADIAL or self.gfd_angular > GFD_POLAR_ANGULAR:
            raise ConfigError(f"GFD keeps at most {GFD_POLAR_RADIAL}x{GFD_POLAR_ANGULAR} coefficients")
        _check_hwd(self.hwd_resize, self.hwd_levels)

    def as_dict(self):
        d = asdict(self)
        d["acc_distances"] = list(self.acc_distances)
        return d


def _check_hwd(size, levels):
    if size & (size - 1):
        raise ConfigError(f"hwd_resize must be a power of two, got {size}")
    if size >> levels < 1:
        raise ConfigError(f"hwd_resize={size} is too small for {levels} Haar levels")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    descriptor: Descriptor
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise InvalidInputError("feature values must be one-dimensional")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "descriptor", Descriptor(self.descriptor))

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.descriptor == other.descriptor and np.array_equal(self.values, other.values)

    __hash__ = None


def descriptor_length(which, cfg=None):
    cfg = cfg or DescriptorConfig()
    which = Descriptor.parse(which)
    if which is Descriptor.GCH:
        return cfg.gch_bins_per_channel**3
    if which is Descriptor.BIC:
        return 2 * cfg.bic_bins_per_channel**3
    if which is Descriptor.CCV:
        return 2 * cfg.ccv_bins_per_channel**3
    if which is Descriptor.ACC:
        return cfg.acc_bins_per_channel**3 * len(cfg.acc_distances)
    if which is Descriptor.GFD:
        return cfg.gfd_radial * cfg.gfd_angular
    return 3 * cfg.hwd_levels + 1


# ---------------------------------------------------------------------------
# shared helpers


def _as_image(img):
    return img if isinstance(img, Image) else Image(img)


def quantize(img, bins):
    """Per-pixel color index in ``[0, bins**3)`` from uniform RGB binning."""
    px = _as_image(img).pixels.astype(np.int64)
    q = (px * bins) // 256
    return (q[:, :, 0] * bins + q[:, :, 1]) * bins + q[:, :, 2]


def grayscale(img):
    px = _as_image(img).pixels.astype(np.float64)
    wr, wg, wb = GRAY_WEIGHTS
    return wr * px[:, :, 0] + wg * px[:, :, 1] + wb * px[:, :, 2]


def _interp_axis(n_in, n_out):
    # half-pixel-centre mapping, clamped to the valid range
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize_bilinear(gray, size):
    """Resize a 2-D float array to ``size x size`` with separable bilinear interpolation."""
    gray = np.asarray(gray, dtype=np.float64)
    r0, r1, fr = _interp_axis(gray.shape[0], size)
    c0, c1, fc = _interp_axis(gray.shape[1], size)
    top, bot = gray[r0, :], gray[r1, :]
    rows = top + fr[:, None] * (bot - top)
    left, right = rows[:, c0], rows[:, c1]
    return left + fc[None, :] * (right - left)


def _sample_bilinear(gray, ys, xs):
    h, w = gray.shape
    ys = np.clip(ys, 0.0, h - 1)
    xs = np.clip(xs, 0.0, w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy, fx = ys - y0, xs - x0
    top = gray[y0, x0] + fx * (gray[y0, x1] - gray[y0, x0])
    bot = gray[y1, x0] + fx * (gray[y1, x1] - gray[y1, x0])
    return top + fy * (bot - top)


# ---------------------------------------------------------------------------
# color descriptors


def extract_gch(img, cfg=None):
    cfg = cfg or DescriptorConfig()
    bins = cfg.gch_bins_per_channel
    q = quantize(img, bins)
    hist = np.bincount(q.ravel(), minlength=bins**3).astype(np.float64)
    return FeatureVector(Descriptor.GCH, hist / q.size)


def interior_mask(q):
    """True where every in-bounds 4-neighbour has the same quantized color."""
    interior = np.ones(q.shape, dtype=bool)
    same_h = q[:, :-1] == q[:, 1:]
    same_v = q[:-1, :] == q[1:, :]
    interior[:, :-1] &= same_h
    interior[:, 1:] &= same_h
    interior[:-1, :] &= same_v
    interior[1:, :] &= same_v
    return interior


def extract_bic(img, cfg=None):
    cfg = cfg or DescriptorConfig()
    bins = cfg.bic_bins_per_channel
    q = quantize(img, bins)
    inner = interior_mask(q)
    ncol = bins**3
    border = np.bincount(q[~inner], minlength=ncol)
    interior = np.bincount(q[inner], minlength=ncol)
    return FeatureVector(Descriptor.BIC, np.concatenate([border, interior]).astype(np.float64) / q.size)


_EIGHT = np.ones((3, 3), dtype=bool)


def component_sizes(q):
    """Size of the 8-connected same-color component containing each pixel."""
    sizes = np.zeros(q.shape, dtype=np.int64)
    for color in np.unique(q):
        labels, _ = ndimage.label(q == color, structure=_EIGHT)
        mask = labels > 0
        counts = np.bincount(labels[mask])
        sizes[mask] = counts[labels[mask]]
    return sizes


def extract_ccv(img, cfg=None):
    cfg = cfg or DescriptorConfig()
    bins = cfg.ccv_bins_per_channel
    q = quantize(img, bins)
    tau = math.ceil(cfg.ccv_tau_fraction * q.size)
    coherent = component_sizes(q) >= tau
    ncol = bins**3
    coh = np.bincount(q[coherent], minlength=ncol)
    inc = np.bincount(q[~coherent], minlength=ncol)
    return FeatureVector(Descriptor.CCV, np.concatenate([coh, inc]).astype(np.float64) / q.size)


def chessboard_ring(d):
    """Offsets ``(dy, dx)`` at L-infinity distance exactly ``d``."""
    return [(dy, dx) for dy in range(-d, d + 1) for dx in range(-d, d + 1) if max(abs(dy), abs(dx)) == d]


def extract_acc(img, cfg=None):
    """Autocorrelogram laid out distance-major: block ``k`` holds all colors at ``acc_distances[k]``."""
    cfg = cfg or DescriptorConfig()
    bins = cfg.acc_bins_per_channel
    q = quantize(img, bins)
    h, w = q.shape
    ncol = bins**3
    blocks = []
    for d in cfg.acc_distances:
        same = np.zeros(ncol, dtype=np.int64)
        total = np.zeros(ncol, dtype=np.int64)
        for dy, dx in chessboard_ring(d):
            if abs(dy) >= h or abs(dx) >= w:
                continue
            src = q[max(0, -dy) : h - max(0, dy), max(0, -dx) : w - max(0, dx)]
            dst = q[max(0, dy) : h - max(0, -dy), max(0, dx) : w - max(0, -dx)]
            total += np.bincount(src.ravel(), minlength=ncol)
            same += np.bincount(src[src == dst], minlength=ncol)
        with np.errstate(invalid="ignore", divide="ignore"):
            blocks.append(np.where(total > 0, same / np.maximum(total, 1), 0.0))
    return FeatureVector(Descriptor.ACC, np.concatenate(blocks))


# ---------------------------------------------------------------------------
# texture descriptors


def extract_gfd(img, cfg=None):
    """Generic Fourier descriptor: magnitudes of the polar 2-D Fourier transform.

    The resized grayscale frame is resampled on a 64x64 polar grid centred at its
    intensity centroid, reaching out to the farthest image corner; samples beyond
    the frame reuse the nearest edge value. The DC term is divided by the mass the
    polar grid would have if it saw the mean intensity everywhere, and every other
    coefficient by the DC magnitude. A zero-mass frame maps to the zero vector.
    """
    cfg = cfg or DescriptorConfig()
    size = cfg.gfd_resize
    g = resize_bilinear(grayscale(img), size)
    out = np.zeros(cfg.gfd_radial * cfg.gfd_angular)
    mass = g.sum()
    if mass <= 0.0:
        return FeatureVector(Descriptor.GFD, out)
    idx = np.arange(size, dtype=np.float64)
    cy = float((g.sum(axis=1) * idx).sum() / mass)
    cx = float((g.sum(axis=0) * idx).sum() / mass)
    corners = [(0.0, 0.0), (0.0, size - 1.0), (size - 1.0, 0.0), (size - 1.0, size - 1.0)]
    radius = max(math.hypot(y - cy, x - cx) for y, x in corners)
    radii = radius * np.arange(GFD_POLAR_RADIAL) / GFD_POLAR_RADIAL
    theta = 2.0 * np.pi * np.arange(GFD_POLAR_ANGULAR) / GFD_POLAR_ANGULAR
    ys = cy + radii[:, None] * np.sin(theta)[None, :]
    xs = cx + radii[:, None] * np.cos(theta)[None, :]
    polar = _sample_bilinear(g, ys, xs)
    mag = np.abs(np.fft.fft2(polar))[: cfg.gfd_radial, : cfg.gfd_angular]
    dc = mag[0, 0]
    if dc <= 0.0:
        return FeatureVector(Descriptor.GFD, out)
    feats = mag / dc
    feats[0, 0] = dc / (polar.size * g.mean())
    return FeatureVector(Descriptor.GFD, feats.ravel())


def haar_step(g):
    """One level of the averaging 2-D Haar transform: ``(approx, horizontal, vertical, diagonal)``."""
    a, b = g[0::2, 0::2], g[0::2, 1::2]
    c, d = g[1::2, 0::2], g[1::2, 1::2]
    approx = ((a + b) + (c + d)) / 4.0
    horizontal = ((a + b) - (c + d)) / 4.0
    vertical = ((a - b) + (c - d)) / 4.0
    diagonal = ((a - b) - (c - d)) / 4.0
    return approx, horizontal, vertical, diagonal


def extract_hwd(img, cfg=None):
    cfg = cfg or DescriptorConfig()
    _check_hwd(cfg.hwd_resize, cfg.hwd_levels)
    g = resize_bilinear(grayscale(img), cfg.hwd_resize)
    feats = []
    for _ in range(cfg.hwd_levels):
        g, h, v, d = haar_step(g)
        feats += [np.abs(h).mean(), np.abs(v).mean(), np.abs(d).mean()]
    feats.append(np.abs(g).mean())
    return FeatureVector(Descriptor.HWD, np.array(feats))


_EXTRACTORS = {
    Descriptor.ACC: extract_acc,
    Descriptor.CCV: extract_ccv,
    Descriptor.BIC: extract_bic,
    Descriptor.GCH: extract_gch,
    Descriptor.GFD: extract_gfd,
    Descriptor.HWD: extract_hwd,
}


def extract(img, which, cfg=None):
    return _EXTRACTORS[Descriptor.parse(which)](img, cfg or DescriptorConfig())
