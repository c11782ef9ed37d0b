"""Selfish-agent community formation over an information matrix.

Each node is an agent whose utility is the information it receives from
nodes it shares a community with, scaled by ``1/m``:

    U_i = (1/m) * sum_{j != i} I[i, j] * delta_ij  [- lam * (|labels_i| - 1)]

Agents picked uniformly at random play a best response among joining a
neighbouring community, leaving to a fresh singleton, or staying put. The
run stops once a full pass finds no improving move (a local Nash
equilibrium), after a long stall on large graphs, or at a pick cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffusion import InfoMatrix
from .exceptions import ConfigError, StateError
from .graph import DISJOINT, OVERLAPPING, CommunityCover, Graph

NOOP = ("noop", None)
LEAVE = ("leave", None)

_REL_TOL = 1e-12


@dataclass(frozen=True)
class GameConfig:
    max_picks: int | None = None
    stall_threshold: int | None = None
    exact_sweep_n_max: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("max_picks", "stall_threshold"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise ConfigError(f"{name} must be positive")
        if self.exact_sweep_n_max < 1:
            raise ConfigError("exact_sweep_n_max must be positive")


class _SparseInfo:
    """Row-wise nonzeros of a finalized information matrix."""

    def __init__(self, info):
        if isinstance(info, InfoMatrix):
            if not info.finalized:
                raise StateError("information matrix is not finalized")
            arr = info.entries
        else:
            arr = np.asarray(info, dtype=np.float64)
        self.n = arr.shape[0]
        self.cols = []
        self.vals = []
        for i in range(self.n):
            nz = np.flatnonzero(arr[i])
            nz = nz[nz != i]
            self.cols.append(nz.tolist())
            self.vals.append(arr[i, nz].tolist())
        self.dense = arr


def _sparse(info) -> _SparseInfo:
    return info if isinstance(info, _SparseInfo) else _SparseInfo(info)


class GameState:
    """Strategy profile: the set of community ids each node belongs to."""

    def __init__(self, n: int, mode: str = DISJOINT, lam: float = 0.0, m_norm: float = 1.0):
        if mode not in (DISJOINT, OVERLAPPING):
            raise ConfigError(f"unknown game mode {mode!r}")
        if lam < 0:
            raise ConfigError("label cost must be nonnegative")
        if not m_norm > 0:
            raise ConfigError("m_norm must be positive")
        self.n = n
        self.mode = mode
        self.lam = float(lam) if mode == OVERLAPPING else 0.0
        self.m_norm = float(m_norm)
        self.labels: list[set[int]] = [{i} for i in range(n)]
        self.members: dict[int, set[int]] = {i: {i} for i in range(n)}
        self._next = n

    @classmethod
    def from_cover(cls, cover: CommunityCover, mode=None, lam=0.0, m_norm=1.0) -> "GameState":
        st = cls(cover.n, mode or cover.mode, lam, m_norm)
        st.labels = [set() for _ in range(cover.n)]
        st.members = {}
        for k, c in enumerate(cover.communities):
            st.members[k] = set(c)
            for v in c:
                st.labels[v].add(k)
        for v in range(cover.n):
            if not st.labels[v]:
                st._fresh(v)
        st._next = max(st.members, default=-1) + 1
        return st

    def _fresh(self, i: int) -> int:
        c = self._next
        self._next += 1
        self.members[c] = {i}
        self.labels[i].add(c)
        return c

    def _drop(self, i: int, c: int) -> None:
        self.labels[i].discard(c)
        mem = self.members[c]
        mem.discard(i)
        if not mem:
            del self.members[c]

    def apply(self, i: int, op) -> None:
        kind, c = op
        if kind == "noop":
            return
        if kind == "leave":
            for old in list(self.labels[i]):
                self._drop(i, old)
            self._fresh(i)
        elif kind == "join":
            if c not in self.members:
                raise StateError(f"community {c} is not live")
            if self.mode == DISJOINT:
                for old in list(self.labels[i]):
                    self._drop(i, old)
            self.labels[i].add(c)
            self.members[c].add(i)
        else:
            raise ValueError(f"unknown operation {op!r}")

    def copy(self) -> "GameState":
        out = GameState.__new__(GameState)
        out.n, out.mode, out.lam, out.m_norm, out._next = self.n, self.mode, self.lam, self.m_norm, self._next
        out.labels = [set(s) for s in self.labels]
        out.members = {c: set(s) for c, s in self.members.items()}
        return out

    def shares(self, i: int, j: int) -> bool:
        return not self.labels[i].isdisjoint(self.labels[j])

    def cover(self) -> CommunityCover:
        return CommunityCover(self.members.values(), self.n, self.mode)


def utility(i: int, state: GameState, info) -> float:
    """Utility of agent ``i`` in the current profile."""
    sp = _sparse(info)
    if sp.n != state.n:
        raise ConfigError("information matrix size does not match the game")
    total = 0.0
    for j, x in zip(sp.cols[i], sp.vals[i]):
        if state.shares(i, j):
            total += x
    return total / state.m_norm - state.lam * (len(state.labels[i]) - 1)


def _neighbor_communities(i: int, state: GameState, graph) -> set[int]:
    out: set[int] = set()
    for j in _adj(graph, i):
        out |= state.labels[j]
    return out - state.labels[i]


def _adj(graph, i):
    if isinstance(graph, Graph):
        return graph.adjacency[i]
    return graph[i]


def _candidates(i, state, info, graph):
    """Yield ``(op, utility)`` for every move in the local strategy space, no-op first."""
    sp = _sparse(info)
    m = state.m_norm
    own = state.labels[i]
    cols, vals = sp.cols[i], sp.vals[i]
    current = 0.0
    if state.mode == DISJOINT:
        per = {}
        (mine,) = own
        for j, x in zip(cols, vals):
            (cj,) = state.labels[j]
            per[cj] = per.get(cj, 0.0) + x
        current = per.get(mine, 0.0) / m
        yield NOOP, current
        for c in sorted(_neighbor_communities(i, state, graph)):
            yield ("join", c), per.get(c, 0.0) / m
    else:
        extra = {}
        for j, x in zip(cols, vals):
            lj = state.labels[j]
            if own.isdisjoint(lj):
                for c in lj:
                    extra[c] = extra.get(c, 0.0) + x
            else:
                current += x
        k = len(own)
        yield NOOP, current / m - state.lam * (k - 1)
        for c in sorted(_neighbor_communities(i, state, graph)):
            yield ("join", c), (current + extra.get(c, 0.0)) / m - state.lam * k
    if len(own) > 1 or len(state.members[next(iter(own))]) > 1:
        yield LEAVE, 0.0


def best_response(i: int, state: GameState, info, graph):
    """Best move for agent ``i``: ``("join", c)``, ``("leave", None)`` or ``("noop", None)``.

    A move must beat staying put strictly; among equal moves the lowest
    community id wins and leaving comes last.
    """
    best_op, best_u = None, None
    for op, u in _candidates(i, state, info, graph):
        if best_op is None:
            best_op, best_u = op, u
        elif u > best_u + _REL_TOL * (abs(best_u) + 1.0):
            best_op, best_u = op, u
    return best_op


def default_m(graph) -> float:
    if isinstance(graph, Graph):
        return float(max(graph.n_edges, 1))
    return float(max(sum(len(a) for a in graph) // 2, 1))


def default_lambda(info, m_norm: float) -> float:
    arr = _sparse(info).dense
    nz = arr[arr > 0]
    return float(nz.mean() / m_norm) if len(nz) else 0.0


def _support_graph(info) -> list[list[int]]:
    arr = _sparse(info).dense
    sym = (arr > 0) | (arr.T > 0)
    np.fill_diagonal(sym, False)
    return [np.flatnonzero(row).tolist() for row in sym]


@dataclass
class GameResult:
    cover: CommunityCover
    state: GameState
    status: str  # "nash" (verified), "stalled" or "max_picks"
    picks: int
    moves: int
    utility_trace: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status != "max_picks"

    @property
    def verified(self) -> bool:
        return self.status == "nash"


def run_game(graph, info, config: GameConfig | None = None, mode: str = DISJOINT,
             lam: float | None = None, m_norm: float | None = None,
             move_hook=None) -> GameResult:
    """Best-response dynamics from all-singletons; see module docstring.

    ``graph`` may be ``None``, in which case the support of ``I`` defines
    who is a neighbour. ``move_hook(i, op, u_before, u_after)`` is called on
    every applied move.
    """
    config = config or GameConfig()
    sp = _sparse(info)
    n = sp.n
    if graph is None:
        graph = _support_graph(sp)
    elif isinstance(graph, Graph) and graph.n != n:
        raise ConfigError(f"graph has {graph.n} nodes, information matrix {n}")
    if m_norm is None:
        m_norm = default_m(graph)
    if lam is None:
        lam = default_lambda(sp, m_norm) if mode == OVERLAPPING else 0.0
    state = GameState(n, mode, lam, m_norm)
    max_picks = config.max_picks or 1000 * max(n, 1)
    stall_limit = config.stall_threshold or 2 * max(n, 1)
    rng = np.random.default_rng(config.seed)

    def step(i):
        op = best_response(i, state, sp, graph)
        if op[0] == "noop":
            return False
        if move_hook is not None:
            before = utility(i, state, sp)
        state.apply(i, op)
        if move_hook is not None:
            move_hook(i, op, before, utility(i, state, sp))
        return True

    picks = moves = stall = 0
    status = "max_picks"
    while n and picks < max_picks:
        picks += 1
        if step(int(rng.integers(n))):
            moves += 1
            stall = 0
            continue
        stall += 1
        if stall < stall_limit:
            continue
        if n > config.exact_sweep_n_max:
            status = "stalled"
            break
        moved = 0
        for i in range(n):
            if step(i):
                moved += 1
        moves += moved
        if not moved:
            status = "nash"
            break
        stall = 0
    if n == 0:
        status = "nash"
    return GameResult(state.cover(), state, status, picks, moves)


def detect_communities(graph, info, config: GameConfig | None = None, **kw) -> CommunityCover:
    """Communities at the end of best-response dynamics (see :func:`run_game`)."""
    return run_game(graph, info, config, **kw).cover


def local_nash_violations(state: GameState, info, graph) -> list[tuple[int, tuple, float]]:
    """Literal equilibrium check: every agent, every move in its local strategy space.

    Each candidate profile is built on a copy of ``state`` and scored with
    :func:`utility`; returns ``(agent, move, improvement)`` for moves that
    beat the current utility.
    """
    sp = _sparse(info)
    if graph is None:
        graph = _support_graph(sp)
    out = []
    for i in range(state.n):
        base = utility(i, state, sp)
        moves = [("join", c) for c in sorted(_neighbor_communities(i, state, graph))]
        if len(state.labels[i]) > 1 or len(state.members[next(iter(state.labels[i]))]) > 1:
            moves.append(LEAVE)
        for op in moves:
            trial = state.copy()
            trial.apply(i, op)
            u = utility(i, trial, sp)
            if u > base + _REL_TOL * (abs(base) + 1.0):
                out.append((i, op, u - base))
    return out
