import numpy as np
import pytest

from diffcomm.exceptions import ConfigError
from diffcomm.generators import ErConfig, GnConfig, generate_er, generate_gn


def _cross_fraction(g, truth):
    lab = truth.labels()
    e = g.edge_array()
    return float(np.mean(lab[e[:, 0]] != lab[e[:, 1]]))


def test_gn_mu_zero_has_no_cross_edges():
    g, truth = generate_gn(GnConfig(0.0, seed=1))
    assert _cross_fraction(g, truth) == 0.0
    assert truth.sizes() == [32] * 4


@pytest.mark.parametrize("seed", range(5))
def test_gn_mean_degree(seed):
    g, _ = generate_gn(GnConfig(0.3, seed=seed))
    assert abs(g.degree().mean() - 16) <= 1.0


@pytest.mark.parametrize("seed", range(5))
def test_gn_cross_fraction(seed):
    g, truth = generate_gn(GnConfig(0.5, seed=seed))
    assert abs(_cross_fraction(g, truth) - 0.5) <= 0.07


@pytest.mark.parametrize("mu", [0.0, 0.25, 0.5])
def test_gn_regular_wiring_exact_degrees(mu):
    g, truth = generate_gn(GnConfig(mu, seed=3, wiring="regular"))
    assert set(g.degree().tolist()) == {16}
    lab = truth.labels()
    internal = np.zeros(g.n, int)
    for u, v in g.edges:
        if lab[u] == lab[v]:
            internal[u] += 1
            internal[v] += 1
    assert set(internal.tolist()) == {round(16 * (1 - mu))}


def test_gn_deterministic():
    a, _ = generate_gn(GnConfig(0.2, seed=9))
    b, _ = generate_gn(GnConfig(0.2, seed=9))
    assert a.edges == b.edges


def test_er_extremes():
    assert generate_er(ErConfig(100, 0.0)).n_edges == 0
    assert generate_er(ErConfig(100, 1.0)).n_edges == 4950


@pytest.mark.parametrize("seed", range(5))
def test_er_edge_count(seed):
    assert abs(generate_er(ErConfig(200, 0.05, seed)).n_edges - 995) <= 100


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        GnConfig(1.5)
    with pytest.raises(ConfigError):
        ErConfig(10, -0.1)
