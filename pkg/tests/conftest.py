"""Shared fixtures: a small on-disk corpus, its feature CSV, and a model.

Session scope keeps the slow parts (rendering and feature extraction) to a
single run for the whole CLI surface.
"""

import pytest

from coldscript import cli, synthetic

SMALL_STYLES = ("bars", "slants", "vees")


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return synthetic.make_corpus(root, per_class=6, seed=5, styles=SMALL_STYLES)


@pytest.fixture(scope="session")
def small_features(small_corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("features") / "features.csv"
    assert cli.main(["extract", str(small_corpus), "-o", str(out)]) == 0
    return out


@pytest.fixture(scope="session")
def small_model(small_features, tmp_path_factory):
    out = tmp_path_factory.mktemp("model") / "model.json"
    assert cli.main(["train", str(small_features), "-o", str(out), "--folds", "3"]) == 0
    return out
