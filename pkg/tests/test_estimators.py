import networkx as nx
import numpy as np
import pytest
import scipy.sparse as sp
from sklearn.base import clone

from diffcomm.diffusion import InfoMatrix
from diffcomm.estimators import DiffusionModel, GIDCommunityDetector, LabelPropagation
from diffcomm.exceptions import ConfigError, FormatError
from diffcomm.graph import Graph
from diffcomm.validation import check_cover, check_graph, check_info


def test_check_graph_inputs_agree():
    G = nx.karate_club_graph()
    ref = check_graph(G)
    A = nx.to_numpy_array(G)
    assert check_graph(A).edges == ref.edges
    assert check_graph(sp.csr_matrix(A)).edges == ref.edges
    assert check_graph(np.array(list(G.edges()))).edges == ref.edges
    assert check_graph(ref) is ref


def test_check_graph_rejects_junk():
    with pytest.raises(FormatError):
        check_graph(np.zeros((3, 4)))
    with pytest.raises(ConfigError):
        check_graph(nx.DiGraph([(0, 1)]))


def test_check_cover_and_info():
    assert len(check_cover([0, 0, 1])) == 2
    assert check_cover([[0, 1], [1, 2]]).mode == "overlapping"
    info = check_info(np.zeros((3, 3)))
    assert isinstance(info, InfoMatrix) and info.finalized
    with pytest.raises(ConfigError):
        check_info(np.zeros((3, 3)), n=4)


def test_diffusion_model_fit_transform():
    G = nx.karate_club_graph()
    dm = DiffusionModel(runs=2, epochs=3, random_state=1)
    M = dm.fit_transform(G)
    assert M.shape == (34, 34) and (M >= 0).all()
    assert np.array_equal(M, DiffusionModel(runs=2, epochs=3, random_state=1).fit(G).transform(G))
    assert dm.trajectory_[0][0] == 0


def test_detector_api(karate):
    g, truth = karate
    est = GIDCommunityDetector(diffusion_params={"runs": 2, "epochs": 5}, random_state=2)
    labels = est.fit_predict(g)
    assert labels.shape == (34,)
    assert est.converged_ and est.status_ in ("nash", "stalled")
    assert sum(len(c) for c in est.communities_) == 34
    assert 0.0 <= est.score(g, truth.labels()) <= 1.0
    params = clone(est).get_params()
    assert params["diffusion"] == "PSODM" and params["random_state"] == 2


def test_detector_with_precomputed_info():
    edges = [(i, j) for b in (0, 5) for i in range(b, b + 5) for j in range(i + 1, b + 5)]
    g = Graph(10, edges + [(4, 5)])
    I = np.zeros((10, 10))
    I[:5, :5] = I[5:, 5:] = 1.0
    np.fill_diagonal(I, 0)
    labels = GIDCommunityDetector().fit(g, info=I).labels_
    assert len(set(labels[:5])) == 1 and len(set(labels[5:])) == 1 and labels[0] != labels[9]


def test_detector_bad_mode():
    with pytest.raises(ConfigError):
        GIDCommunityDetector(mode="weird").fit(Graph(2, [(0, 1)]), info=np.zeros((2, 2)))


def test_label_propagation_estimator():
    G = nx.karate_club_graph()
    est = LabelPropagation(random_state=0)
    assert est.fit_predict(G).shape == (34,)
    assert set(clone(est).get_params()) == {"max_sweeps", "random_state"}
