"""Information diffusion engines and the information-transfer matrix.

Three models share one driver, :func:`run_diffusion`:

* ``GADM``  -- one-point crossover between the two contacting nodes, each
  keeping the fittest of {itself, offspring 1, offspring 2};
* ``EGADM`` -- GADM followed by per-bit mutation of both results;
* ``PSODM`` -- real-valued states moved like particles toward the best
  neighbour, accepted only when fitness strictly improves.

Every accepted gain of node ``i`` during a contact with ``j`` is credited to
``I[i, j]``; the per-run matrices are averaged into an :class:`InfoMatrix`.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ConfigError, FormatError, ModelMismatchError, StateError
from .graph import EventStream, Graph
from .hdf import LITERAL_DIFFERENCE, MATCH_FACTOR, HdfFunction

logger = logging.getLogger(__name__)

GADM = "GADM"
EGADM = "EGADM"
PSODM = "PSODM"
MODELS = (GADM, EGADM, PSODM)


@dataclass(frozen=True)
class ModelConfig:
    model: str = PSODM
    beta: int = 10
    p_m: float = 0.1
    c_accel: float = 0.02
    init: str = "uniform"
    epochs: int = 20
    runs: int = 10
    seed: int = 0
    early_stop: bool = True
    fitness_mode: str = MATCH_FACTOR

    def __post_init__(self):
        model = str(self.model).upper()
        if model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        object.__setattr__(self, "model", model)
        if not 0.0 <= self.p_m <= 1.0:
            raise ConfigError("p_m must be in [0, 1]")
        if not self.c_accel > 0:
            raise ConfigError("c_accel must be positive")
        if self.init not in ("uniform", "zero"):
            raise ConfigError("init must be 'uniform' or 'zero'")
        if self.epochs < 1 or self.runs < 1 or self.beta < 1:
            raise ConfigError("beta, epochs and runs must be positive")
        if self.fitness_mode not in (MATCH_FACTOR, LITERAL_DIFFERENCE):
            raise ConfigError(f"unknown fitness mode {self.fitness_mode!r}")

    @property
    def binary(self) -> bool:
        return self.model != PSODM


def _fitness_fn(f: HdfFunction, binary: bool, mode: str = MATCH_FACTOR):
    mask, bits, scores = f._mask, f._bits, f._scores
    if binary:
        def fit(v):
            return float(scores[np.all(~mask | (bits == v), axis=1)].sum())
    elif mode == MATCH_FACTOR:
        def fit(v):
            return float(np.where(mask, 1.0 - np.abs(bits - v), 1.0).prod(axis=1) @ scores)
    else:
        def fit(v):
            d = np.abs(bits - v)
            return float(np.where(mask & (d != 0.0), d, 1.0).prod(axis=1) @ scores)
    return fit


class DiffusionState:
    """Per-node state vectors with a cached fitness per node.

    ``vectors`` is an ``(n, beta)`` float array; for the binary models it
    only ever holds 0.0/1.0. ``velocity`` is allocated for real-valued
    states. ``positions`` is the same array as ``vectors``.
    """

    def __init__(self, vectors, f: HdfFunction, binary: bool, velocity=None,
                 fitness_mode: str = MATCH_FACTOR):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] != f.beta:
            raise ConfigError(f"state vectors must have shape (n, {f.beta})")
        if binary and np.any((vectors != 0.0) & (vectors != 1.0)):
            raise ModelMismatchError("binary state holds non-binary values")
        if not binary and (np.any(vectors < 0.0) or np.any(vectors > 1.0)):
            raise ValueError("real state values must lie in [0, 1]")
        self.f = f
        self.binary = binary
        self.fitness_mode = fitness_mode
        self._fit = _fitness_fn(f, binary, fitness_mode)
        self.vectors = vectors
        if velocity is None and not binary:
            velocity = np.zeros_like(vectors)
        self.velocity = None if velocity is None else np.array(velocity, dtype=np.float64)
        self.fitness = [self._fit(row) for row in vectors]

    @classmethod
    def initialize(cls, n: int, f: HdfFunction, model: str = PSODM, init: str = "uniform",
                   rng=None, fitness_mode: str = MATCH_FACTOR) -> "DiffusionState":
        rng = np.random.default_rng(rng)
        binary = model != PSODM
        if init == "zero":
            vec = np.zeros((n, f.beta))
        elif binary:
            vec = rng.integers(0, 2, size=(n, f.beta)).astype(np.float64)
        else:
            vec = rng.random((n, f.beta))
        return cls(vec, f, binary, fitness_mode=fitness_mode)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def positions(self) -> np.ndarray:
        return self.vectors

    def score(self, vector) -> float:
        return self._fit(np.asarray(vector, dtype=np.float64))

    def total_fitness(self) -> float:
        return float(sum(self.fitness))

    def copy(self) -> "DiffusionState":
        out = DiffusionState.__new__(DiffusionState)
        out.f, out.binary, out.fitness_mode, out._fit = self.f, self.binary, self.fitness_mode, self._fit
        out.vectors = self.vectors.copy()
        out.velocity = None if self.velocity is None else self.velocity.copy()
        out.fitness = list(self.fitness)
        return out


def _require_binary(state: DiffusionState):
    if not state.binary:
        raise ModelMismatchError("GADM/EGADM steps need a binary state")


def _adopt(state: DiffusionState, x: int, candidates) -> float:
    # argmax over {current, *candidates}; ties keep the current vector, then the earlier candidate
    best_fit = state.fitness[x]
    best = None
    for vec, fv in candidates:
        if fv > best_fit:
            best, best_fit = vec, fv
    if best is None:
        return 0.0
    gain = best_fit - state.fitness[x]
    state.vectors[x] = best
    state.fitness[x] = best_fit
    return gain


def gadm_step(u: int, v: int, state: DiffusionState, f: HdfFunction | None = None,
              rng=None) -> tuple[float, float]:
    """One crossover contact between ``u`` and ``v``; returns the accepted gains."""
    _require_binary(state)
    if u == v:
        raise ValueError("a contact needs two distinct nodes")
    beta = state.vectors.shape[1]
    c = int(rng.integers(1, beta + 1))
    su, sv = state.vectors[u], state.vectors[v]
    g1 = np.concatenate((su[:c - 1], sv[c - 1:]))
    g2 = np.concatenate((sv[:c - 1], su[c - 1:]))
    cand = ((g1, state._fit(g1)), (g2, state._fit(g2)))
    gain_v = _adopt(state, v, cand)
    gain_u = _adopt(state, u, cand)
    return gain_u, gain_v


def egadm_step(u: int, v: int, state: DiffusionState, f: HdfFunction | None = None,
               rng=None, p_m: float = 0.1) -> tuple[float, float]:
    """Crossover contact, then bit-flip mutation of both results.

    ``w1`` mutates the post-crossover vector of ``u`` and ``w2`` that of
    ``v``; a bit flips when its uniform draw is below ``p_m``. Each node
    then keeps the fittest of {its vector, w1, w2}. A mutant with no
    flipped bit is not a candidate, so ``p_m = 0`` reduces to
    :func:`gadm_step`.
    """
    gu, gv = gadm_step(u, v, state, f, rng)
    beta = state.vectors.shape[1]
    cand = []
    for x in (u, v):
        w = state.vectors[x].copy()
        flip = rng.random(beta) < p_m
        if flip.any():
            w[flip] = 1.0 - w[flip]
            cand.append((w, state._fit(w)))
    gu += _adopt(state, u, cand)
    gv += _adopt(state, v, cand)
    return gu, gv


def _neighbors(graph, x):
    if graph is None:
        return ()
    if isinstance(graph, Graph):
        return graph.adjacency[x]
    return graph[x]


def _pso_move(x: int, state: DiffusionState, nbrs, rng, c_accel: float) -> float:
    if not nbrs:
        return 0.0
    fit = state.fitness
    best = max(nbrs, key=lambda j: (fit[j], -j))
    pos = state.vectors[x]
    vel = state.velocity[x]
    r = rng.random(pos.shape[0])
    vel += c_accel * r * (state.vectors[best] - pos)
    tentative = np.clip(pos + vel, 0.0, 1.0)
    ft = state._fit(tentative)
    if ft > fit[x]:
        gain = ft - fit[x]
        state.vectors[x] = tentative
        fit[x] = ft
        return gain
    return 0.0


def psodm_step(u: int, v: int, state: DiffusionState, f: HdfFunction | None = None,
               graph=None, rng=None, c_accel: float = 0.02) -> tuple[float, float]:
    """Particle move of both endpoints toward their best-fitness neighbour.

    ``graph`` is a :class:`Graph` or any per-node sequence of neighbour
    collections. Velocities keep their update even when the new position is
    rejected. A node without neighbours does not move.
    """
    if state.binary or state.velocity is None:
        raise ModelMismatchError("PSODM steps need a real-valued state")
    if u == v:
        raise ValueError("a contact needs two distinct nodes")
    gu = _pso_move(u, state, _neighbors(graph, u), rng, c_accel)
    gv = _pso_move(v, state, _neighbors(graph, v), rng, c_accel)
    return gu, gv


class InfoMatrix:
    """Accumulated information transfer ``I[i, j]`` averaged over runs.

    Per-run matrices are summed with :meth:`add_run` (or :meth:`merge` for
    partial sums computed elsewhere) and divided by the run count in
    :meth:`finalize`.
    """

    def __init__(self, n: int):
        self.n = int(n)
        self._sum = np.zeros((self.n, self.n))
        self.run_count = 0
        self.finalized = False
        self.entries: np.ndarray | None = None

    @classmethod
    def from_array(cls, entries, run_count: int = 1) -> "InfoMatrix":
        arr = np.array(entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("information matrix must be square")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("information matrix entries must be finite and nonnegative")
        if np.any(np.diag(arr) != 0):
            raise ValueError("information matrix diagonal must be zero")
        out = cls(arr.shape[0])
        out._sum = arr * run_count
        out.run_count = run_count
        out.entries = arr
        out.finalized = True
        return out

    def add_run(self, matrix) -> None:
        if self.finalized:
            raise StateError("matrix already finalized")
        self._sum += matrix
        self.run_count += 1

    def merge(self, other: "InfoMatrix") -> "InfoMatrix":
        if self.finalized or other.finalized:
            raise StateError("cannot merge finalized matrices")
        out = InfoMatrix(self.n)
        out._sum = self._sum + other._sum
        out.run_count = self.run_count + other.run_count
        return out

    def finalize(self) -> "InfoMatrix":
        if self.run_count == 0:
            raise StateError("no runs recorded")
        if not self.finalized:
            self.entries = self._sum / self.run_count
            self.finalized = True
        return self

    def to_tsv(self) -> str:
        """One row per source node: ``i<TAB>j:value...`` or ``i<TAB>-`` when empty."""
        if not self.finalized:
            raise StateError("finalize before dumping")
        buf = io.StringIO()
        buf.write(f"# n={self.n} runs={self.run_count}\n")
        for i in range(self.n):
            nz = np.flatnonzero(self.entries[i])
            cells = "\t".join(f"{j}:{float(self.entries[i, j])!r}" for j in nz) if len(nz) else "-"
            buf.write(f"{i}\t{cells}\n")
        return buf.getvalue()

    @classmethod
    def from_tsv(cls, text: str) -> "InfoMatrix":
        n = runs = None
        rows = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    if key == "n":
                        n = int(val)
                    elif key == "runs":
                        runs = int(val)
                continue
            toks = line.split("\t")
            try:
                i = int(toks[0])
                cells = [] if toks[1:] == ["-"] else [c.split(":") for c in toks[1:]]
                rows[i] = [(int(j), float(x)) for j, x in cells]
            except (ValueError, IndexError):
                raise FormatError(f"line {lineno}: bad information-matrix row") from None
        if n is None:
            n = max(rows, default=-1) + 1
        arr = np.zeros((n, n))
        for i, cells in rows.items():
            for j, x in cells:
                arr[i, j] = x
        return cls.from_array(arr, run_count=runs or 1)

    def __repr__(self):
        return f"InfoMatrix(n={self.n}, runs={self.run_count}, finalized={self.finalized})"


@dataclass
class DiffusionResult:
    state: DiffusionState
    info: InfoMatrix
    trajectory: list[tuple[int, float]]
    accepted: list[int] = field(default_factory=list)
    epochs_run: list[int] = field(default_factory=list)

    def trajectory_csv(self) -> str:
        return "epoch,total_fitness\n" + "".join(f"{e},{v!r}\n" for e, v in self.trajectory)


def _run_once(cfg: ModelConfig, graph: Graph | None, stream: EventStream, f: HdfFunction,
              seed: int, record: bool, step_hook=None):
    rng = np.random.default_rng(seed)
    n = max(stream.n, graph.n if graph is not None else 0)
    state = DiffusionState.initialize(n, f, cfg.model, cfg.init, rng, cfg.fitness_mode)
    mat = np.zeros((n, n))
    us, vs = stream.u.tolist(), stream.v.tolist()
    total = len(us)
    epoch_len = stream.epoch_length or total
    seen = None
    if cfg.model == PSODM and graph is None:
        seen = [set() for _ in range(n)]
    nbrs = graph if seen is None else seen
    traj = [(0, state.total_fitness())] if record else []
    accepted = 0
    epochs = 0
    for start in range(0, total, epoch_len):
        acc_epoch = 0
        for k in range(start, min(start + epoch_len, total)):
            u, v = us[k], vs[k]
            if u == v:
                continue
            if cfg.model == GADM:
                gu, gv = gadm_step(u, v, state, f, rng)
            elif cfg.model == EGADM:
                gu, gv = egadm_step(u, v, state, f, rng, cfg.p_m)
            else:
                if seen is not None:
                    seen[u].add(v)
                    seen[v].add(u)
                gu, gv = psodm_step(u, v, state, f, nbrs, rng, cfg.c_accel)
            if gu > 0.0:
                mat[u, v] += gu
                acc_epoch += 1
            if gv > 0.0:
                mat[v, u] += gv
                acc_epoch += 1
            if step_hook is not None:
                step_hook(u, v, gu, gv, state)
        epochs += 1
        accepted += acc_epoch
        if record:
            traj.append((epochs, state.total_fitness()))
        if cfg.early_stop and acc_epoch == 0:
            break
    return state, mat, traj, accepted, epochs


def run_diffusion(config: ModelConfig, graph: Graph | None, stream: EventStream,
                  f: HdfFunction, step_hook=None) -> DiffusionResult:
    """Run ``config.runs`` independent diffusions over ``stream``.

    Run ``k`` is seeded with ``config.seed ^ k``. Epoch boundaries come from
    ``stream.epoch_length`` (a stream without one is a single epoch); with
    ``early_stop`` a run ends after an epoch with no accepted update. The
    returned state and trajectory belong to the first run. ``step_hook``,
    if given, is called as ``hook(u, v, gain_u, gain_v, state)`` after each
    contact.
    """
    if len(stream) == 0:
        raise ConfigError("event stream is empty")
    if config.beta != f.beta:
        raise ConfigError(f"config beta={config.beta} but HDF beta={f.beta}")
    n = max(stream.n, graph.n if graph is not None else 0)
    info = InfoMatrix(n)
    first = None
    accepted, epochs_run = [], []
    for k in range(config.runs):
        state, mat, traj, acc, ep = _run_once(config, graph, stream, f, config.seed ^ k,
                                              record=(k == 0), step_hook=step_hook)
        info.add_run(mat)
        accepted.append(acc)
        epochs_run.append(ep)
        if k == 0:
            first = (state, traj)
    info.finalize()
    return DiffusionResult(first[0], info, first[1], accepted, epochs_run)


def config_for(model: str, **kw) -> ModelConfig:
    return replace(ModelConfig(), model=model, **kw)
