"""Input coercion shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .diffusion import InfoMatrix
from .exceptions import ConfigError, FormatError
from .graph import CommunityCover, EventStream, Graph


def check_graph(X) -> Graph:
    """Coerce ``X`` to a :class:`Graph`.

    Accepts a Graph, a networkx graph (nodes relabelled ``0..n-1`` in
    sorted order), a square adjacency matrix (dense or scipy sparse; any
    nonzero counts as an edge) or a ``(k, 2)`` integer edge array.
    """
    if isinstance(X, Graph):
        return X
    if isinstance(X, EventStream):
        return Graph(X.n, zip(X.u.tolist(), X.v.tolist()))
    if hasattr(X, "nodes") and hasattr(X, "edges"):
        if X.is_directed():
            raise ConfigError("directed graphs are not supported")
        nodes = sorted(X.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        return Graph(len(nodes), ((index[u], index[v]) for u, v in X.edges()))
    try:
        import scipy.sparse as sp
    except ImportError:  # pragma: no cover
        sp = None
    if sp is not None and sp.issparse(X):
        A = sp.coo_matrix(X)
        if A.shape[0] != A.shape[1]:
            raise FormatError("adjacency matrix must be square")
        return Graph(A.shape[0], zip(A.row.tolist(), A.col.tolist()))
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        rows, cols = np.nonzero(arr)
        return Graph(arr.shape[0], zip(rows.tolist(), cols.tolist()))
    if arr.ndim == 2 and arr.shape[1] == 2:
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.round(arr)):
                raise FormatError("edge array must hold integer node ids")
        arr = arr.astype(np.int64)
        n = int(arr.max()) + 1 if arr.size else 0
        return Graph(n, map(tuple, arr.tolist()))
    raise FormatError(f"cannot interpret input of shape {arr.shape} as a graph")


def check_stream(X, epochs: int, rng) -> tuple[Graph | None, EventStream]:
    """Graph-like input becomes an epoch-shuffled stream; streams pass through."""
    from .graph import build_event_stream

    if isinstance(X, EventStream):
        return None, X
    g = check_graph(X)
    return g, build_event_stream(g, epochs, rng)


def check_info(info, n: int | None = None) -> InfoMatrix:
    if isinstance(info, InfoMatrix):
        out = info
    else:
        out = InfoMatrix.from_array(np.asarray(info, dtype=np.float64))
    if not out.finalized:
        out.finalize()
    if n is not None and out.n != n:
        raise ConfigError(f"information matrix is {out.n}x{out.n}, expected {n}")
    return out


def check_cover(y, n: int | None = None) -> CommunityCover:
    """A CommunityCover, a per-node label array, or a list of node sets."""
    if isinstance(y, CommunityCover):
        return y
    if isinstance(y, np.ndarray) and y.ndim == 1 or (
        isinstance(y, (list, tuple)) and y and all(np.isscalar(v) for v in y)
    ):
        return CommunityCover.from_labels(list(np.asarray(y).tolist()))
    comms = [list(c) for c in y]
    if n is None:
        n = max((max(c) for c in comms if c), default=-1) + 1
    return CommunityCover.infer(comms, n)
