"""scikit-learn style wrappers around the functional core."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .baselines import LpaConfig, lpa_detect
from .diffusion import ModelConfig, run_diffusion
from .exceptions import ConfigError
from .game import GameConfig, run_game
from .graph import DISJOINT, OVERLAPPING, CommunityCover
from .hdf import MATCH_FACTOR, example_hdf
from .metrics import nmi_overlapping
from .validation import check_cover, check_graph, check_info, check_stream

_MODES = {"disjoint": DISJOINT, "overlap": OVERLAPPING, "overlapping": OVERLAPPING}


def _seed(random_state) -> int:
    if random_state is None:
        return int(np.random.default_rng().integers(2**63))
    return int(random_state)


class DiffusionModel(TransformerMixin, BaseEstimator):
    """Runs GADM, EGADM or PSODM diffusion and exposes the information matrix.

    ``fit`` accepts anything :func:`check_graph` understands (the graph is
    replayed as ``epochs`` shuffled passes over its edges) or an
    :class:`EventStream`. After fitting:

    - ``info_``: finalized :class:`InfoMatrix`
    - ``state_``: final :class:`DiffusionState` of the first run
    - ``trajectory_``: ``(epoch, total_fitness)`` pairs of the first run
    """

    def __init__(self, model="PSODM", hdf=None, p_m=0.1, c_accel=0.02, init="uniform",
                 epochs=20, runs=10, early_stop=True, fitness_mode=MATCH_FACTOR,
                 random_state=0):
        self.model = model
        self.hdf = hdf
        self.p_m = p_m
        self.c_accel = c_accel
        self.init = init
        self.epochs = epochs
        self.runs = runs
        self.early_stop = early_stop
        self.fitness_mode = fitness_mode
        self.random_state = random_state

    def _config(self, seed: int, beta: int) -> ModelConfig:
        return ModelConfig(model=self.model, beta=beta, p_m=self.p_m, c_accel=self.c_accel,
                           init=self.init, epochs=self.epochs, runs=self.runs, seed=seed,
                           early_stop=self.early_stop, fitness_mode=self.fitness_mode)

    def fit(self, X, y=None):
        seed = _seed(self.random_state)
        f = self.hdf if self.hdf is not None else example_hdf()
        cfg = self._config(seed, f.beta)
        graph, stream = check_stream(X, self.epochs, seed)
        res = run_diffusion(cfg, graph, stream, f)
        self.hdf_ = f
        self.graph_ = graph
        self.info_ = res.info
        self.state_ = res.state
        self.trajectory_ = res.trajectory
        self.n_features_in_ = res.info.n
        return self

    def transform(self, X):
        """Dense ``(n, n)`` information matrix of the fitted run; ``X`` is not used."""
        check_is_fitted(self, "info_")
        return self.info_.entries.copy()


class GIDCommunityDetector(ClusterMixin, BaseEstimator):
    """Diffusion followed by the best-response community game.

    ``diffusion`` picks the model (``"GADM"``, ``"EGADM"``, ``"PSODM"``);
    ``diffusion_params`` is forwarded to :class:`DiffusionModel`. Pass a
    precomputed matrix via ``fit(X, info=...)`` to skip diffusion.

    Fitted attributes: ``labels_`` (first community of each node),
    ``cover_``, ``communities_``, ``converged_``, ``status_``, ``info_``.
    """

    def __init__(self, diffusion="PSODM", mode="disjoint", lam=None, m_norm=None,
                 max_picks=None, stall_threshold=None, exact_sweep_n_max=1000,
                 diffusion_params=None, random_state=0):
        self.diffusion = diffusion
        self.mode = mode
        self.lam = lam
        self.m_norm = m_norm
        self.max_picks = max_picks
        self.stall_threshold = stall_threshold
        self.exact_sweep_n_max = exact_sweep_n_max
        self.diffusion_params = diffusion_params
        self.random_state = random_state

    def fit(self, X, y=None, info=None):
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be 'disjoint' or 'overlap', got {self.mode!r}")
        seed = _seed(self.random_state)
        graph = check_graph(X)
        if info is None:
            dm = DiffusionModel(model=self.diffusion, random_state=seed,
                                **(self.diffusion_params or {}))
            info = dm.fit(graph).info_
        info = check_info(info, graph.n)
        cfg = GameConfig(max_picks=self.max_picks, stall_threshold=self.stall_threshold,
                         exact_sweep_n_max=self.exact_sweep_n_max, seed=seed)
        res = run_game(graph, info, cfg, mode=_MODES[self.mode], lam=self.lam, m_norm=self.m_norm)
        self.info_ = info
        self.result_ = res
        self._set_cover(res.cover)
        self.converged_ = res.converged
        self.status_ = res.status
        return self

    def _set_cover(self, cover: CommunityCover):
        self.cover_ = cover
        self.communities_ = [sorted(c) for c in cover.communities]
        self.labels_ = np.array([m[0] if m else -1 for m in cover.memberships()])

    def score(self, X, y):
        """Overlapping NMI of the fitted cover against ``y``."""
        check_is_fitted(self, "cover_")
        return nmi_overlapping(self.cover_, check_cover(y, self.cover_.n))


class LabelPropagation(GIDCommunityDetector):
    """Asynchronous label propagation baseline with the same fitted attributes."""

    def __init__(self, max_sweeps=100, random_state=0):
        self.max_sweeps = max_sweeps
        self.random_state = random_state

    def fit(self, X, y=None):
        graph = check_graph(X)
        cover = lpa_detect(graph, LpaConfig(self.max_sweeps, _seed(self.random_state)))
        self._set_cover(cover)
        self.converged_ = True
        self.status_ = "converged"
        return self
