"""Benchmark graphs with known (or known-absent) community structure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .graph import CommunityCover, Graph

GN_NODES = 128
GN_GROUPS = 4
GN_GROUP_SIZE = 32
GN_DEGREE = 16


@dataclass(frozen=True)
class GnConfig:
    """``wiring="expected"`` draws independent edges (degree 16 on average);
    ``"regular"`` gives every node exactly ``round(16*(1-mu))`` internal and
    the remaining external links."""

    mu: float
    seed: int = 0
    wiring: str = "expected"

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ConfigError(f"mu must be in [0, 1], got {self.mu}")
        if self.wiring not in ("expected", "regular"):
            raise ConfigError(f"unknown GN wiring {self.wiring!r}")


@dataclass(frozen=True)
class ErConfig:
    n: int
    p: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must be in [0, 1], got {self.p}")


def _bernoulli_pairs(prob: np.ndarray, rng) -> list[tuple[int, int]]:
    n = prob.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < prob[iu, ju]
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def gn_truth() -> CommunityCover:
    return CommunityCover(
        [range(k * GN_GROUP_SIZE, (k + 1) * GN_GROUP_SIZE) for k in range(GN_GROUPS)],
        n=GN_NODES,
    )


def generate_gn(config: GnConfig) -> tuple[Graph, CommunityCover]:
    """Planted 4x32 partition with expected degree 16.

    Within-group pairs link with probability ``(1-mu)*16/31`` and
    cross-group pairs with ``mu*16/96``, so on average a fraction ``mu``
    of each node's 16 links leaves its group.
    """
    if config.wiring == "regular":
        return _generate_gn_regular(config), gn_truth()
    p_in = (1.0 - config.mu) * GN_DEGREE / (GN_GROUP_SIZE - 1)
    p_out = config.mu * GN_DEGREE / (GN_NODES - GN_GROUP_SIZE)
    block = np.arange(GN_NODES) // GN_GROUP_SIZE
    prob = np.where(block[:, None] == block[None, :], p_in, p_out)
    rng = np.random.default_rng(config.seed)
    return Graph(GN_NODES, _bernoulli_pairs(prob, rng)), gn_truth()


def _generate_gn_regular(config: GnConfig, max_tries: int = 1000) -> Graph:
    import networkx as nx

    rng = np.random.default_rng(config.seed)
    k_in = int(round(GN_DEGREE * (1.0 - config.mu)))
    k_out = GN_DEGREE - k_in
    edges = set()
    for b in range(GN_GROUPS):
        if k_in == 0:
            break
        sub = nx.random_regular_graph(k_in, GN_GROUP_SIZE, seed=int(rng.integers(2**32)))
        off = b * GN_GROUP_SIZE
        edges.update((min(u, v) + off, max(u, v) + off) for u, v in sub.edges())
    block = np.arange(GN_NODES) // GN_GROUP_SIZE
    for _ in range(max_tries):
        if k_out == 0:
            break
        pool = rng.permutation(np.repeat(np.arange(GN_NODES), k_out)).tolist()
        cross = set()
        stuck = False
        while pool and not stuck:
            u = pool.pop()
            ok = [i for i, w in enumerate(pool)
                  if block[w] != block[u] and (min(u, w), max(u, w)) not in cross]
            if not ok:
                stuck = True
                continue
            w = pool.pop(ok[int(rng.integers(len(ok)))])
            cross.add((min(u, w), max(u, w)))
        if not stuck:
            edges |= cross
            break
    else:
        raise ConfigError("could not wire a regular GN graph")
    return Graph(GN_NODES, edges)


def generate_er(config: ErConfig) -> Graph:
    """G(n, p): every unordered pair is an edge independently with probability p."""
    rng = np.random.default_rng(config.seed)
    prob = np.full((config.n, config.n), config.p)
    return Graph(config.n, _bernoulli_pairs(prob, rng))
