"""Linear one-vs-rest genre classifier whose decision regions form the genre dictionary."""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .binio import Reader, pack_floats, pack_string, split_crc, with_crc
from .descriptors import Descriptor, FeatureVector
from .errors import BoGWarning, ConfigError, FormatError, InvalidInputError

MODEL_MAGIC = b"BOGM"
MODEL_VERSION = 1


@dataclass(frozen=True)
class GenreSet:
    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if len(labels) < 2:
            raise InvalidInputError("a genre set needs at least two genres")
        if len(set(labels)) != len(labels):
            raise InvalidInputError("genre names must be unique")
        object.__setattr__(self, "labels", labels)

    @property
    def G(self):
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, name):
        try:
            return self.labels.index(name)
        except ValueError:
            raise InvalidInputError(f"unknown genre {name!r}") from None


@dataclass(frozen=True)
class LabeledFeature:
    feature: FeatureVector
    genre: int


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    epochs: int = 20
    seed: int = 0
    frames_per_genre: int = 800

    def __post_init__(self):
        if not self.C > 0 or not math.isfinite(self.C):
            raise ConfigError(f"C must be a positive finite number, got {self.C}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ConfigError(f"epochs must be an integer >= 1, got {self.epochs}")
        if int(self.frames_per_genre) != self.frames_per_genre or self.frames_per_genre < 1:
            raise ConfigError(f"frames_per_genre must be an integer >= 1, got {self.frames_per_genre}")


@dataclass(eq=False)
class LinearModel:
    genre_set: GenreSet
    weights: np.ndarray
    biases: np.ndarray
    feature_means: np.ndarray
    feature_scales: np.ndarray
    descriptor: Descriptor
    config_hash: bytes = bytes(32)  # feature-extraction config
    train_hash: bytes = bytes(32)
    # per-genre regularized objective after each epoch; not persisted
    objective_history: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float64)
        self.feature_means = np.ascontiguousarray(self.feature_means, dtype=np.float64)
        self.feature_scales = np.ascontiguousarray(self.feature_scales, dtype=np.float64)
        self.descriptor = Descriptor(self.descriptor)
        G, D = self.genre_set.G, self.feature_dim
        if self.weights.shape != (G, D) or self.biases.shape != (G,) or self.feature_scales.shape != (D,):
            raise InvalidInputError("model array shapes disagree with genre count and feature dimension")
        for arr in (self.weights, self.biases, self.feature_means, self.feature_scales):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("model contains non-finite values")
        if np.any(self.feature_scales <= 0):
            raise InvalidInputError("feature scales must be strictly positive")
        if len(self.config_hash) != 32 or len(self.train_hash) != 32:
            raise InvalidInputError("provenance hashes must be 32 bytes")

    @property
    def feature_dim(self):
        return self.feature_means.shape[0]

    def __eq__(self, other):
        if not isinstance(other, LinearModel):
            return NotImplemented
        return (
            self.genre_set == other.genre_set
            and self.descriptor == other.descriptor
            and self.config_hash == other.config_hash
            and self.train_hash == other.train_hash
            and all(
                np.array_equal(a, b)
                for a, b in (
                    (self.weights, other.weights),
                    (self.biases, other.biases),
                    (self.feature_means, other.feature_means),
                    (self.feature_scales, other.feature_scales),
                )
            )
        )

    def check_feature(self, feature):
        if feature.descriptor != self.descriptor:
            raise InvalidInputError(f"feature descriptor {feature.descriptor.name} does not match model {self.descriptor.name}")
        if len(feature) != self.feature_dim:
            raise InvalidInputError(f"feature dimension {len(feature)} does not match model dimension {self.feature_dim}")

    def scores(self, X):
        """Decision values for a ``(n, D)`` matrix of raw features."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.feature_dim:
            raise InvalidInputError(f"feature dimension {X.shape[1]} does not match model dimension {self.feature_dim}")
        Z = (X - self.feature_means) / self.feature_scales
        return Z @ self.weights.T + self.biases

    def predict_matrix(self, X):
        # np.argmax returns the first maximum, i.e. the lowest genre index on ties
        return np.argmax(self.scores(X), axis=1)


# ---------------------------------------------------------------------------
# sampling and standardization


def sample_training_frames(pool, N, seed):
    """Split ``pool`` into N-per-genre training frames and the held-out remainder.

    Genres with fewer than ``N`` frames contribute all of them and emit a
    :class:`BoGWarning`. Both outputs keep the pool's original order.
    """
    if not pool:
        raise InvalidInputError("cannot sample from an empty pool")
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    chosen = sample_indices([lf.genre for lf in pool], N, seed)
    mask = np.zeros(len(pool), dtype=bool)
    mask[chosen] = True
    train = [lf for lf, m in zip(pool, mask) if m]
    held_out = [lf for lf, m in zip(pool, mask) if not m]
    return train, held_out


def sample_indices(labels, N, seed):
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    chosen = []
    for g in np.unique(labels):
        idx = np.flatnonzero(labels == g)
        if len(idx) < N:
            warnings.warn(f"genre {int(g)} has only {len(idx)} frames (< N={N}); using all of them", BoGWarning, stacklevel=3)
            chosen.append(idx)
        else:
            chosen.append(rng.choice(idx, size=N, replace=False))
    return np.sort(np.concatenate(chosen))


def standardize_fit(train):
    """Population mean and standard deviation per dimension; constant dimensions get scale 1."""
    if len(train) == 0:
        raise InvalidInputError("cannot standardize an empty training set")
    X = _stack(train)
    return _standardize_matrix(X)


def _standardize_matrix(X):
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    constant = np.all(X == X[0], axis=0)
    means[constant] = X[0, constant]
    scales[constant] = 1.0
    scales[scales <= 0] = 1.0
    return means, scales


def _stack(items):
    feats = [it.feature if isinstance(it, LabeledFeature) else it for it in items]
    desc = feats[0].descriptor
    dim = len(feats[0])
    for f in feats:
        if f.descriptor != desc or len(f) != dim:
            raise InvalidInputError("all features must share one descriptor and dimension")
    return np.vstack([f.values for f in feats])


# ---------------------------------------------------------------------------
# training


def hinge_objective(w, b, X, y, C):
    margins = y * (X @ w + b)
    return 0.5 * (w @ w + b * b) + C * np.maximum(0.0, 1.0 - margins).sum()


def fit_binary(X, y, C, epochs, rng):
    """Pegasos-style primal subgradient descent for one binary problem.

    The bias is learned as the weight of a constant input, so it shares the
    regularizer. Step size is ``1/(lam*t)`` with ``lam = 1/(C*n)`` and ``t``
    counting single-example updates. Returns ``(w, b, objective_per_epoch)``.
    """
    n, D = X.shape
    lam = 1.0 / (C * n)
    Xa = np.hstack([X, np.ones((n, 1))])
    w = np.zeros(D + 1)
    radius = 1.0 / math.sqrt(lam)
    history = np.empty(epochs)
    t = 0
    for epoch in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            xi = Xa[i]
            violated = y[i] * (w @ xi) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * y[i]) * xi
            norm = math.sqrt(w @ w)
            if norm > radius:
                w *= radius / norm
        history[epoch] = hinge_objective(w[:D], w[D], X, y, C)
    return w[:D].copy(), float(w[D]), history


def train(train, genres, cfg):
    """Train the one-vs-rest linear SVM over standardized features."""
    if len(train) == 0:
        raise InvalidInputError("training set is empty")
    X = _stack(train)
    labels = np.array([lf.genre for lf in train])
    G = genres.G
    if labels.min() < 0 or labels.max() >= G:
        raise InvalidInputError("training label outside the genre set")
    missing = sorted(set(range(G)) - set(labels.tolist()))
    if missing:
        names = [genres.labels[g] for g in missing]
        raise InvalidInputError(f"genres absent from training data: {names}")
    means, scales = _standardize_matrix(X)
    Z = (X - means) / scales
    weights = np.empty((G, X.shape[1]))
    biases = np.empty(G)
    history = np.empty((G, cfg.epochs))
    for g in range(G):
        y = np.where(labels == g, 1.0, -1.0)
        rng = np.random.default_rng([cfg.seed, g])
        weights[g], biases[g], history[g] = fit_binary(Z, y, cfg.C, cfg.epochs, rng)
    return LinearModel(
        genre_set=genres,
        weights=weights,
        biases=biases,
        feature_means=means,
        feature_scales=scales,
        descriptor=train[0].feature.descriptor,
        objective_history=history,
    )


def predict(model, feature):
    model.check_feature(feature)
    return int(model.predict_matrix(feature.values[None, :])[0])


def evaluate_accuracy(model, test):
    if len(test) == 0:
        raise InvalidInputError("test set is empty")
    for lf in test:
        model.check_feature(lf.feature)
    pred = model.predict_matrix(_stack(test))
    labels = np.array([lf.genre for lf in test])
    return float(np.mean(pred == labels))


# ---------------------------------------------------------------------------
# persistence


def model_to_bytes(model):
    G, D = model.genre_set.G, model.feature_dim
    payload = bytearray(MODEL_MAGIC)
    payload += struct.pack("<HBII", MODEL_VERSION, int(model.descriptor), G, D)
    for arr in (model.feature_means, model.feature_scales, model.weights, model.biases):
        payload += pack_floats(arr)
    payload += model.config_hash + model.train_hash
    for name in model.genre_set.labels:
        payload += pack_string(name)
    return with_crc(bytes(payload))


def model_from_bytes(data, what="model file"):
    r = Reader(data, what)
    if r.take(4) != MODEL_MAGIC:
        r.pos = 0
        r.fail("bad magic, not a model file")
    version = r.unpack("H")
    if version != MODEL_VERSION:
        r.fail(f"unsupported model version {version}")
    code = r.unpack("B")
    try:
        descriptor = Descriptor(code)
    except ValueError:
        r.fail(f"unknown descriptor code {code}")
    G, D = r.unpack("II")
    if G < 2 or D < 1:
        r.fail(f"invalid declared sizes G={G}, D={D}")
    expected = 4 + 7 + 8 * (2 * D + G * D + G) + 64 + 2 * G + 4
    if expected > len(data):
        r.fail(f"declared G={G}, D={D} need at least {expected} bytes, file has {len(data)}")
    means = r.floats(D)
    scales = r.floats(D)
    weights = r.floats(G * D).reshape(G, D)
    biases = r.floats(G)
    config_hash = r.take(32)
    train_hash = r.take(32)
    names = [r.string() for _ in range(G)]
    if len(data) - r.pos != 4:
        r.fail(f"{len(data) - r.pos - 4} unexpected bytes before CRC trailer")
    split_crc(bytes(data), what)
    try:
        return LinearModel(GenreSet(tuple(names)), weights, biases, means, scales, descriptor, config_hash, train_hash)
    except InvalidInputError as exc:
        raise FormatError(f"{what}: {exc}") from exc


def save_model(model, path):
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path):
    return model_from_bytes(Path(path).read_bytes(), what=str(path))
