from pathlib import Path

import numpy as np
import pytest

import diffcomm
from diffcomm.graph import read_communities, read_edge_list

DATA = Path(diffcomm.__file__).parent / "data"


class PinnedRng:
    """Replays fixed draws for ``integers`` and ``random`` calls."""

    def __init__(self, integers=(), random=()):
        self._ints = list(integers)
        self._reals = [np.asarray(r, dtype=float) for r in random]

    def integers(self, low, high=None, size=None):
        return self._ints.pop(0)

    def random(self, size=None):
        return self._reals.pop(0)


@pytest.fixture
def pinned():
    return PinnedRng


@pytest.fixture(scope="session")
def karate():
    g = read_edge_list(DATA / "karate.edges")
    return g, read_communities(DATA / "karate.truth", format="node-label", n=g.n)
