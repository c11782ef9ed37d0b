"""Label propagation, the in-repo reference detector for comparison curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .graph import CommunityCover, Graph


@dataclass(frozen=True)
class LpaConfig:
    max_sweeps: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be at least 1")


def lpa_detect(graph: Graph, config: LpaConfig | None = None) -> CommunityCover:
    """Asynchronous label propagation.

    Every node starts with its own label. Each sweep visits nodes in a
    fresh random order and gives each the most frequent label among its
    neighbours (uniform random choice among ties, keeping the current
    label when it is one of them). Stops after a sweep with no change.
    """
    config = config or LpaConfig()
    if graph.n == 0:
        raise ConfigError("graph has no nodes")
    rng = np.random.default_rng(config.seed)
    labels = list(range(graph.n))
    adj = graph.adjacency
    for _ in range(config.max_sweeps):
        changed = False
        for v in rng.permutation(graph.n).tolist():
            if not adj[v]:
                continue
            counts: dict[int, int] = {}
            for u in adj[v]:
                counts[labels[u]] = counts.get(labels[u], 0) + 1
            top = max(counts.values())
            if counts.get(labels[v], 0) == top:
                continue
            best = sorted(lab for lab, c in counts.items() if c == top)
            labels[v] = best[int(rng.integers(len(best)))] if len(best) > 1 else best[0]
            changed = True
        if not changed:
            break
    return CommunityCover.from_labels(labels)
