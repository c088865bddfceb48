"""Run configuration, INI-style config files and provenance hashes."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from ..classifier import TrainConfig
from ..descriptors import Descriptor, DescriptorConfig
from ..errors import ConfigError

# BoS vectors in the original comparison are 100-bin histograms.
BOS_DIMENSIONALITY = 100
REFERENCE_FRAME_SWEEP = (100, 500, 800)


@dataclass(frozen=True)
class RunConfig:
    descriptor: Descriptor = Descriptor.GCH
    descriptor_config: DescriptorConfig = field(default_factory=DescriptorConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    query_fraction: float = 0.05
    replication_seeds: tuple = (0, 1, 2, 3, 4)
    k: int = 10
    level: float = 0.99

    def __post_init__(self):
        object.__setattr__(self, "descriptor", Descriptor.parse(self.descriptor))
        object.__setattr__(self, "replication_seeds", tuple(int(s) for s in self.replication_seeds))
        if not 0.0 < self.query_fraction <= 1.0:
            raise ConfigError(f"query_fraction must lie in (0, 1], got {self.query_fraction}")
        if len(self.replication_seeds) < 1:
            raise ConfigError("at least one replication seed is required")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must lie in (0, 1)")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self):
        return {
            "descriptor": self.descriptor.name,
            "descriptor_config": self.descriptor_config.as_dict(),
            "train": dataclasses.asdict(self.train),
            "query_fraction": self.query_fraction,
            "replication_seeds": list(self.replication_seeds),
            "k": self.k,
            "level": self.level,
        }

    def feature_hash(self):
        """Hash of everything that determines extracted frame features."""
        return _digest({"descriptor": self.descriptor.name, "descriptor_config": self.descriptor_config.as_dict()})

    def train_hash(self):
        return _digest({"features": self.feature_hash().hex(), "train": dataclasses.asdict(self.train)})

    def run_hash(self):
        return _digest(self.as_dict())


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).digest()


def _int_list(text):
    return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)


_DESCRIPTOR_FIELDS = {f.name: f.type for f in dataclasses.fields(DescriptorConfig)}


def load_config(path=None):
    """Read a RunConfig from an INI file with optional ``[descriptor]``, ``[train]`` and ``[evaluate]`` sections."""
    if path is None:
        return RunConfig()
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    known = {"descriptor", "train", "evaluate"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    try:
        kwargs = {}
        if parser.has_section("descriptor"):
            sec = dict(parser.items("descriptor"))
            if "name" in sec:
                kwargs["descriptor"] = Descriptor.parse(sec.pop("name"))
            dcfg = {}
            for key, value in sec.items():
                if key not in _DESCRIPTOR_FIELDS:
                    raise ConfigError(f"unknown descriptor option {key!r}")
                if key == "acc_distances":
                    dcfg[key] = _int_list(value)
                elif key == "ccv_tau_fraction":
                    dcfg[key] = float(value)
                else:
                    dcfg[key] = int(value)
            kwargs["descriptor_config"] = DescriptorConfig(**dcfg)
        if parser.has_section("train"):
            sec = dict(parser.items("train"))
            casts = {"C": float, "epochs": int, "seed": int, "frames_per_genre": int}
            tcfg = {}
            for key, value in sec.items():
                if key not in casts:
                    raise ConfigError(f"unknown train option {key!r}")
                tcfg[key] = casts[key](value)
            kwargs["train"] = TrainConfig(**tcfg)
        if parser.has_section("evaluate"):
            sec = dict(parser.items("evaluate"))
            for key, value in sec.items():
                if key == "query_fraction":
                    kwargs[key] = float(value)
                elif key == "replication_seeds":
                    kwargs[key] = _int_list(value)
                elif key == "k":
                    kwargs[key] = int(value)
                elif key == "level":
                    kwargs[key] = float(value)
                else:
                    raise ConfigError(f"unknown evaluate option {key!r}")
        return RunConfig(**kwargs)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid value in {path}: {exc}") from exc
