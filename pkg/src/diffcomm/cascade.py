"""Independent Cascade and Linear Threshold spread simulations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .graph import Graph


@dataclass
class CascadeConfig:
    """``p_edge`` is one probability for every edge or a dict keyed by ``(u, v)``.

    ``weights`` maps ``(u, v)`` to the LT influence of ``u`` on ``v``;
    when omitted each in-neighbour of ``v`` weighs ``1 / deg(v)``.
    """

    seed_set: frozenset = frozenset()
    p_edge: float | dict = 0.1
    weights: dict | None = None
    seed: int | None = None

    def __post_init__(self):
        self.seed_set = frozenset(int(x) for x in self.seed_set)
        probs = self.p_edge.values() if isinstance(self.p_edge, dict) else [self.p_edge]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ConfigError("propagation probabilities must be in [0, 1]")


def _edge_prob(p_edge, u, v):
    if isinstance(p_edge, dict):
        return p_edge.get((u, v), p_edge.get((v, u), 0.0))
    return p_edge


def run_independent_cascade(graph: Graph, config: CascadeConfig, rng=None) -> set[int]:
    """Each newly active node gets one chance to activate each inactive neighbour."""
    rng = np.random.default_rng(config.seed if rng is None else rng)
    active = set(config.seed_set)
    frontier = list(active)
    while frontier:
        nxt = []
        for u in frontier:
            for v in graph.adjacency[u]:
                if v not in active and rng.random() < _edge_prob(config.p_edge, u, v):
                    active.add(v)
                    nxt.append(v)
        frontier = nxt
    return active


def lt_weights(graph: Graph, weights: dict | None) -> list[dict[int, float]]:
    """Incoming weight table ``w[v][u]``; raises when a node's weights sum above 1."""
    w: list[dict[int, float]] = [dict() for _ in range(graph.n)]
    for v in range(graph.n):
        nbrs = graph.adjacency[v]
        for u in nbrs:
            if weights is None:
                w[v][u] = 1.0 / len(nbrs)
            else:
                w[v][u] = float(weights.get((u, v), 0.0))
        if sum(w[v].values()) > 1.0 + 1e-12:
            raise ConfigError(f"incoming LT weights of node {v} sum above 1")
    return w


def run_linear_threshold(graph: Graph, config: CascadeConfig, rng=None) -> set[int]:
    """Activate ``v`` once the weight of its active neighbours reaches ``theta_v``.

    Thresholds are drawn once per node from ``(0, 1]``.
    """
    rng = np.random.default_rng(config.seed if rng is None else rng)
    w = lt_weights(graph, config.weights)
    theta = 1.0 - rng.random(graph.n)
    active = set(config.seed_set)
    changed = True
    while changed:
        changed = False
        for v in range(graph.n):
            if v in active:
                continue
            if sum(b for u, b in w[v].items() if u in active) >= theta[v]:
                active.add(v)
                changed = True
    return active
