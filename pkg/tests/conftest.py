import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """The 6-genre x 20-video x 20-frame corpus at noise 0.1, with GCH features extracted."""
    from bog.pipeline import commands, synth
    from bog.pipeline.config import RunConfig
    from bog.pipeline.manifest import load_manifest

    root = tmp_path_factory.mktemp("synth")
    manifest_path = synth.generate(root / "data", genres=6, videos=20, frames=20, noise=0.1, seed=0)
    manifest = load_manifest(manifest_path)
    cfg = RunConfig()
    commands.cmd_extract(manifest, cfg, root / "features")
    return {
        "root": root,
        "manifest_path": manifest_path,
        "manifest": manifest,
        "train_cache": commands.cache_path(root / "features", "train", "GCH"),
        "test_cache": commands.cache_path(root / "features", "test", "GCH"),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
