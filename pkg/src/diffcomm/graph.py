"""Graphs, timed contact streams, community covers and their text formats."""

from __future__ import annotations

import bisect
import io
import logging
from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from .exceptions import FormatError, ParseError, RangeError

logger = logging.getLogger(__name__)

DISJOINT = "disjoint"
OVERLAPPING = "overlapping"


class Graph:
    """Undirected simple graph over nodes ``0..n-1``.

    Self-loops are dropped (their count is kept in ``dropped_self_loops``)
    and duplicate edges are merged. Edges are stored as ``(u, v)`` with
    ``u < v`` in sorted order; ``adjacency[v]`` is a sorted tuple.
    """

    __slots__ = ("n", "edges", "adjacency", "dropped_self_loops")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(n)
        if n < 0:
            raise RangeError("node count must be nonnegative")
        canon = set()
        loops = 0
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise RangeError(f"edge ({u}, {v}) outside [0, {n})")
            if u == v:
                loops += 1
                continue
            canon.add((u, v) if u < v else (v, u))
        if loops:
            logger.warning("dropped %d self-loop(s)", loops)
        neigh: list[list[int]] = [[] for _ in range(n)]
        for u, v in canon:
            neigh[u].append(v)
            neigh[v].append(u)
        self.n = n
        self.edges = tuple(sorted(canon))
        self.adjacency = tuple(tuple(sorted(a)) for a in neigh)
        self.dropped_self_loops = loops

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def has_edge(self, u: int, v: int) -> bool:
        a = self.adjacency[u]
        i = bisect.bisect_left(a, v)
        return i < len(a) and a[i] == v

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 2)

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={len(self.edges)})"


class EventStream:
    """Time-ordered contacts ``(u, v, t)``.

    Stored column-wise as int64 arrays. ``epoch_length`` is set for streams
    built from a static graph: every consecutive block of that many events
    is one full pass over the edges. ``None`` means the whole stream counts
    as a single epoch.
    """

    __slots__ = ("u", "v", "t", "n", "source", "epoch_length")

    def __init__(self, u, v, t, n=None, source="dynamic", epoch_length=None):
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        t = np.asarray(t, dtype=np.int64).ravel()
        if not (len(u) == len(v) == len(t)):
            raise FormatError("event columns differ in length")
        if len(t) and (np.any(t < 0)):
            raise RangeError("event times must be nonnegative")
        if len(t) > 1 and np.any(np.diff(t) < 0):
            raise FormatError("events must be non-decreasing in time")
        if len(u) and (u.min() < 0 or v.min() < 0):
            raise RangeError("negative node id in event stream")
        max_id = int(max(u.max(), v.max())) + 1 if len(u) else 0
        self.n = max_id if n is None else int(n)
        if self.n < max_id:
            raise RangeError(f"event node id >= n={self.n}")
        if source not in ("static", "dynamic"):
            raise ValueError("source must be 'static' or 'dynamic'")
        self.u, self.v, self.t = u, v, t
        self.source = source
        self.epoch_length = epoch_length

    @classmethod
    def from_events(cls, events: Sequence[tuple[int, int, int]], n=None, source="dynamic"):
        """Build from unsorted triples; a stable sort on ``t`` is applied."""
        arr = np.array(list(events), dtype=np.int64).reshape(-1, 3)
        order = np.argsort(arr[:, 2], kind="stable")
        arr = arr[order]
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], n=n, source=source)

    @property
    def events(self) -> list[tuple[int, int, int]]:
        return list(zip(self.u.tolist(), self.v.tolist(), self.t.tolist()))

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        return (
            isinstance(other, EventStream)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
            and np.array_equal(self.t, other.t)
        )

    def __repr__(self):
        return f"EventStream(events={len(self)}, n={self.n}, source={self.source!r})"


class CommunityCover:
    """A set of distinct, nonempty node sets over ``n`` nodes.

    ``mode`` is ``"disjoint"`` (must be a partition of ``range(n)``) or
    ``"overlapping"``. Identical communities are merged. Communities are
    kept in a canonical order (by smallest member, then size) so that two
    covers with the same sets compare and serialize identically.
    """

    __slots__ = ("communities", "n", "mode")

    def __init__(self, communities: Iterable[Iterable[int]], n: int, mode: str = DISJOINT):
        if mode not in (DISJOINT, OVERLAPPING):
            raise ValueError(f"unknown cover mode {mode!r}")
        n = int(n)
        uniq = set()
        for c in communities:
            s = frozenset(int(x) for x in c)
            if not s:
                continue
            if min(s) < 0 or max(s) >= n:
                raise RangeError(f"community member outside [0, {n})")
            uniq.add(s)
        comms = tuple(sorted(uniq, key=lambda s: (min(s), len(s), sorted(s))))
        if mode == DISJOINT:
            total = sum(len(c) for c in comms)
            union = frozenset().union(*comms) if comms else frozenset()
            if total != len(union):
                raise FormatError("communities overlap in disjoint mode")
            if len(union) != n:
                raise FormatError("disjoint cover does not include every node")
        self.communities = comms
        self.n = n
        self.mode = mode

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "CommunityCover":
        groups = defaultdict(list)
        for node, lab in enumerate(labels):
            groups[lab].append(node)
        return cls(groups.values(), n=len(labels), mode=DISJOINT)

    @classmethod
    def infer(cls, communities, n: int) -> "CommunityCover":
        """Disjoint if the sets partition ``range(n)``, overlapping otherwise."""
        comms = [frozenset(c) for c in communities]
        try:
            return cls(comms, n, DISJOINT)
        except FormatError:
            return cls(comms, n, OVERLAPPING)

    def labels(self) -> np.ndarray:
        """Per-node community index (disjoint covers only)."""
        if self.mode != DISJOINT:
            raise FormatError("labels() requires a disjoint cover")
        out = np.empty(self.n, dtype=np.int64)
        for k, c in enumerate(self.communities):
            out[list(c)] = k
        return out

    def memberships(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for k, c in enumerate(self.communities):
            for v in c:
                out[v].append(k)
        return out

    def sizes(self) -> list[int]:
        return [len(c) for c in self.communities]

    def __len__(self):
        return len(self.communities)

    def __iter__(self):
        return iter(self.communities)

    def __eq__(self, other):
        return (
            isinstance(other, CommunityCover)
            and self.n == other.n
            and set(self.communities) == set(other.communities)
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.communities)))

    def __repr__(self):
        return f"CommunityCover(k={len(self)}, n={self.n}, mode={self.mode!r})"


def _lines(text) -> Iterable[tuple[int, list[str]]]:
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("ascii")
    elif not isinstance(text, str):
        text = text.read()
        if isinstance(text, bytes):
            text = text.decode("ascii")
    for lineno, raw in enumerate(io.StringIO(text), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {lineno}: {tok!r} is not an integer") from None


def parse_edge_list(text, one_based: bool = False, n: int | None = None):
    """Read ``u v`` lines into a :class:`Graph` or ``u v t`` lines into an :class:`EventStream`.

    ``text`` may be ``str``, ``bytes`` or a file object. ``#`` lines are
    comments. The node count is ``max id + 1`` unless ``n`` is given.
    """
    rows = []
    width = None
    offset = 1 if one_based else 0
    for lineno, toks in _lines(text):
        if len(toks) not in (2, 3):
            raise FormatError(f"line {lineno}: expected 2 or 3 tokens, got {len(toks)}")
        if width is None:
            width = len(toks)
        elif width != len(toks):
            raise FormatError(f"line {lineno}: mixed static and timed lines")
        vals = [_int(x, lineno) for x in toks]
        vals[0] -= offset
        vals[1] -= offset
        if vals[0] < 0 or vals[1] < 0:
            raise RangeError(f"line {lineno}: negative node id")
        if width == 3 and vals[2] < 0:
            raise RangeError(f"line {lineno}: negative time")
        rows.append(vals)
    max_id = max((max(r[0], r[1]) for r in rows), default=-1) + 1
    if n is None:
        n = max_id
    elif n < max_id:
        raise RangeError(f"node id {max_id - 1} >= n={n}")
    if width == 3:
        return EventStream.from_events(rows, n=n, source="dynamic")
    return Graph(n, ((r[0], r[1]) for r in rows))


def parse_communities(text, format: str = "per-line", one_based: bool = False,
                      n: int | None = None) -> CommunityCover:
    """Read a community file.

    ``format="per-line"``: each line lists the members of one community.
    ``format="node-label"``: each line is ``node label`` (yields a disjoint
    cover; a node given two different labels is an error).
    """
    offset = 1 if one_based else 0
    if format == "per-line":
        comms = []
        for lineno, toks in _lines(text):
            ids = [_int(x, lineno) - offset for x in toks]
            if min(ids) < 0:
                raise RangeError(f"line {lineno}: negative node id")
            comms.append(ids)
        if not comms:
            raise FormatError("empty community file")
        max_id = max(max(c) for c in comms) + 1
        n = max_id if n is None else n
        return CommunityCover.infer(comms, n)
    if format == "node-label":
        label_of: dict[int, str] = {}
        for lineno, toks in _lines(text):
            if len(toks) != 2:
                raise FormatError(f"line {lineno}: expected 'node label'")
            node = _int(toks[0], lineno) - offset
            if node < 0:
                raise RangeError(f"line {lineno}: negative node id")
            lab = toks[1]
            if label_of.setdefault(node, lab) != lab:
                raise FormatError(f"line {lineno}: node {node + offset} has two labels")
        if not label_of:
            raise FormatError("empty community file")
        n = max(label_of) + 1 if n is None else n
        groups = defaultdict(list)
        for node, lab in label_of.items():
            groups[lab].append(node)
        return CommunityCover(groups.values(), n, DISJOINT)
    raise ValueError(f"unknown community format {format!r}")


def format_edge_list(obj, one_based: bool = False) -> str:
    """Serialize a Graph (``u v``) or EventStream (``u v t``)."""
    off = 1 if one_based else 0
    if isinstance(obj, Graph):
        return "".join(f"{u + off} {v + off}\n" for u, v in obj.edges)
    return "".join(f"{u + off} {v + off} {t}\n" for u, v, t in obj.events)


def format_communities(cover: CommunityCover, format: str = "per-line",
                       one_based: bool = False) -> str:
    off = 1 if one_based else 0
    if format == "per-line":
        return "".join(" ".join(str(x + off) for x in sorted(c)) + "\n" for c in cover)
    if format == "node-label":
        labels = cover.labels()
        return "".join(f"{v + off} {labels[v] + off}\n" for v in range(cover.n))
    raise ValueError(f"unknown community format {format!r}")


def read_edge_list(path, one_based=False, n=None):
    with open(path, "rb") as fh:
        return parse_edge_list(fh.read(), one_based=one_based, n=n)


def read_communities(path, format="per-line", one_based=False, n=None):
    with open(path, "rb") as fh:
        return parse_communities(fh.read(), format=format, one_based=one_based, n=n)


def build_event_stream(graph: Graph, epochs: int, rng) -> EventStream:
    """Repeat the edge set ``epochs`` times, each pass in a fresh random order.

    Event ``k*|E| + j`` gets time ``k*|E| + j``. ``rng`` is a numpy
    ``Generator`` or an integer seed.
    """
    if int(epochs) != epochs or epochs < 1:
        raise ValueError("epochs must be a positive integer")
    m = graph.n_edges
    if m == 0:
        raise ValueError("graph has no edges")
    rng = np.random.default_rng(rng)
    edges = graph.edge_array()
    order = np.concatenate([rng.permutation(m) for _ in range(epochs)])
    picked = edges[order]
    t = np.arange(epochs * m, dtype=np.int64)
    return EventStream(picked[:, 0], picked[:, 1], t, n=graph.n, source="static", epoch_length=m)
