"""Cover-comparison and partition-quality measures.

* :func:`nmi_overlapping` -- normalized mutual information for covers
  (Lancichinetti-Fortunato-Kertesz variant), base-2 logs.
* :func:`fccn` -- fraction of correctly classified nodes under a greedy
  one-to-one matching of detected to true communities.
* :func:`modularity` -- Newman-Girvan Q for a partition.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ModeError, RangeError
from .graph import DISJOINT, CommunityCover, Graph


def _h(p: float) -> float:
    return -p * math.log2(p) if p > 0.0 else 0.0


def _check(cover: CommunityCover, n: int):
    for c in cover.communities:
        if max(c) >= n:
            raise RangeError(f"community member {max(c)} >= n={n}")


def _overlaps(X: CommunityCover, Y: CommunityCover, n: int) -> np.ndarray:
    ind = np.zeros((len(Y), n), dtype=np.int64)
    for l, c in enumerate(Y.communities):
        ind[l, list(c)] = 1
    out = np.zeros((len(X), len(Y)), dtype=np.int64)
    for k, c in enumerate(X.communities):
        out[k] = ind[:, list(c)].sum(axis=1)
    return out


def _cond_norm(X: CommunityCover, Y: CommunityCover, n: int, constrained: bool) -> float:
    # mean over communities of X of H(X_k | Y) / H(X_k)
    if len(X) == 0:
        return 0.0
    over = _overlaps(X, Y, n)
    size_y = [len(c) for c in Y.communities]
    total = 0.0
    for k, c in enumerate(X.communities):
        a = len(c)
        hx = _h(a / n) + _h(1 - a / n)
        best = None
        for l, b in enumerate(size_y):
            ov = int(over[k, l])
            p11 = ov / n
            p10 = (a - ov) / n
            p01 = (b - ov) / n
            p00 = (n - a - b + ov) / n
            if constrained and _h(p11) + _h(p00) < _h(p01) + _h(p10):
                continue
            hy = _h(b / n) + _h(1 - b / n)
            cond = _h(p11) + _h(p10) + _h(p01) + _h(p00) - hy
            if best is None or cond < best:
                best = cond
        if hx == 0.0:
            # whole-universe community: explained only if the other cover has it too
            same = any(b == a and int(over[k, l]) == a for l, b in enumerate(size_y))
            total += 0.0 if same else 1.0
            continue
        if best is None:
            best = hx
        total += max(best, 0.0) / hx
    return total / len(X)


def nmi_overlapping(X: CommunityCover, Y: CommunityCover, n: int | None = None,
                    lfk_constraint: bool = True) -> float:
    """``1 - (H(X|Y)_norm + H(Y|X)_norm) / 2`` for two covers of the same nodes.

    With ``lfk_constraint`` a community ``Y_l`` only counts as an
    explanation of ``X_k`` when ``h(p11) + h(p00) >= h(p01) + h(p10)``;
    when no ``Y_l`` qualifies, ``H(X_k|Y)`` falls back to ``H(X_k)``.
    A community holding every node has zero entropy; it counts as fully
    explained when the other cover contains it too, unexplained otherwise.
    """
    n = X.n if n is None else n
    _check(X, n)
    _check(Y, n)
    val = 1.0 - 0.5 * (_cond_norm(X, Y, n, lfk_constraint) + _cond_norm(Y, X, n, lfk_constraint))
    return min(1.0, max(0.0, val))


def fccn(detected: CommunityCover, truth: CommunityCover, n: int | None = None) -> float:
    """Greedy max-overlap one-to-one matching; matched overlaps summed over ``n``.

    Ties go to the smaller detected index, then the smaller truth index
    (indices in each cover's canonical order).
    """
    n = detected.n if n is None else n
    _check(detected, n)
    _check(truth, n)
    if n == 0 or not len(detected) or not len(truth):
        return 0.0
    over = _overlaps(detected, truth, n)
    free_d = np.ones(over.shape[0], dtype=bool)
    free_t = np.ones(over.shape[1], dtype=bool)
    total = 0
    for _ in range(min(over.shape)):
        masked = np.where(free_d[:, None] & free_t[None, :], over, -1)
        k, l = np.unravel_index(int(np.argmax(masked)), masked.shape)
        total += int(over[k, l])
        free_d[k] = False
        free_t[l] = False
    return total / n


def modularity(graph: Graph, partition: CommunityCover) -> float:
    """``sum_s [l_s / L - (d_s / 2L)^2]``; ``l_s`` intra edges, ``d_s`` degree sum."""
    if partition.mode != DISJOINT:
        raise ModeError("modularity needs a disjoint partition")
    if partition.n != graph.n:
        raise RangeError("partition and graph have different node counts")
    L = graph.n_edges
    if L == 0:
        return 0.0
    lab = partition.labels()
    e = graph.edge_array()
    k = len(partition)
    intra = np.bincount(lab[e[:, 0]][lab[e[:, 0]] == lab[e[:, 1]]], minlength=k)
    deg = np.bincount(lab, weights=graph.degree(), minlength=k)
    return float(np.sum(intra / L - (deg / (2.0 * L)) ** 2))
