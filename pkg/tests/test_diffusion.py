import numpy as np
import pytest

from diffcomm.diffusion import (DiffusionState, InfoMatrix, ModelConfig, egadm_step, gadm_step,
                                psodm_step, run_diffusion)
from diffcomm.exceptions import ConfigError, ModelMismatchError, StateError
from diffcomm.generators import GnConfig, generate_gn
from diffcomm.graph import EventStream, Graph, build_event_stream
from diffcomm.hdf import HdfFunction, Schema, example_hdf


def _bits(s):
    return [float(c) for c in s]


def _hdf(*pairs):
    return HdfFunction(len(pairs[0][0]), tuple(Schema.from_string(p, sc) for p, sc in pairs))


def test_crossover_produces_listed_offspring(pinned):
    f = _hdf(("0010000111", 10.0))
    st = DiffusionState([_bits("1101000111"), _bits("0010110000")], f, binary=True)
    gu, gv = gadm_step(0, 1, st, rng=pinned(integers=[5]))
    assert st.vectors[0].tolist() == _bits("0010000111")
    assert st.vectors[1].tolist() == _bits("0010000111")
    assert (gu, gv) == (10.0, 10.0)


def test_crossover_at_one_swaps_parents(pinned):
    f = _hdf(("1*********", 1.0))
    a, b = _bits("1000000000"), _bits("0111111111")
    st = DiffusionState([a, b], f, binary=True)
    gu, gv = gadm_step(0, 1, st, rng=pinned(integers=[1]))
    assert st.vectors[0].tolist() == a and st.vectors[1].tolist() == a
    assert (gu, gv) == (0.0, 1.0)


def test_identical_parents_no_change():
    f = example_hdf()
    v = _bits("1010011010")
    st = DiffusionState([v, v], f, binary=True)
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert gadm_step(0, 1, st, rng=rng) == (0.0, 0.0)
    assert st.vectors.tolist() == [v, v]


def test_egadm_without_mutation_equals_gadm():
    f = example_hdf()
    rng = np.random.default_rng(5)
    vecs = rng.integers(0, 2, size=(2, 10)).astype(float)
    for seed in range(50):
        a = DiffusionState(vecs, f, binary=True)
        b = DiffusionState(vecs, f, binary=True)
        ga = gadm_step(0, 1, a, rng=np.random.default_rng(seed))
        gb = egadm_step(0, 1, b, rng=np.random.default_rng(seed), p_m=0.0)
        assert ga == gb and np.array_equal(a.vectors, b.vectors)


def test_egadm_full_mutation_complements(pinned):
    # crossover is a no-op on equal parents; the complement is the only improvement
    f = _hdf(("1111111111", 3.0))
    z = _bits("0000000000")
    st = DiffusionState([z, z], f, binary=True)
    rng = pinned(integers=[4], random=[np.zeros(10), np.zeros(10)])
    assert egadm_step(0, 1, st, rng=rng, p_m=1.0) == (3.0, 3.0)
    assert st.vectors.tolist() == [[1.0] * 10] * 2


def test_egadm_pinned_flip(pinned):
    f = _hdf(("1*", 5.0))
    st = DiffusionState([[0.0, 0.0], [0.0, 0.0]], f, binary=True)
    rng = pinned(integers=[2], random=[[0.0, 0.9], [0.9, 0.9]])
    assert egadm_step(0, 1, st, rng=rng, p_m=0.5) == (5.0, 5.0)
    assert st.vectors.tolist() == [[1.0, 0.0], [1.0, 0.0]]


def test_pso_fixed_point(pinned):
    f = _hdf(("1", 5.0))
    st = DiffusionState([[0.4], [0.4]], f, binary=False)
    g = Graph(2, [(0, 1)])
    assert psodm_step(0, 1, st, graph=g, rng=pinned(random=[[0.7], [0.7]]), c_accel=2.0) == (0.0, 0.0)
    assert st.vectors.tolist() == [[0.4], [0.4]]


def test_pso_pinned_move(pinned):
    f = _hdf(("1", 5.0))
    st = DiffusionState([[0.2], [1.0]], f, binary=False)
    assert st.fitness == [pytest.approx(1.0), 5.0]
    g = Graph(2, [(0, 1)])
    gu, gv = psodm_step(0, 1, st, graph=g, rng=pinned(random=[[0.5], [0.5]]), c_accel=2.0)
    assert gu == pytest.approx(4.0) and gv == 0.0
    assert st.vectors[0, 0] == pytest.approx(1.0) and st.fitness[0] == pytest.approx(5.0)
    # u moves first, so v's best neighbour already sits at v's own position
    assert st.vectors[1, 0] == 1.0 and st.velocity[1, 0] == 0.0


def test_pso_rejected_move_keeps_velocity(pinned):
    f = _hdf(("1", 5.0))
    st = DiffusionState([[0.2], [1.0], [0.0]], f, binary=False)
    nbrs = [[2], [0], [0]]
    assert psodm_step(0, 1, st, graph=nbrs, rng=pinned(random=[[0.5], [0.5]]), c_accel=2.0) == (0.0, 0.0)
    assert st.vectors[0, 0] == pytest.approx(0.2)
    assert st.velocity[0, 0] == pytest.approx(-0.2)


def test_model_state_mismatch():
    f = example_hdf()
    binary = DiffusionState(np.zeros((2, 10)), f, binary=True)
    real = DiffusionState(np.full((2, 10), 0.5), f, binary=False)
    with pytest.raises(ModelMismatchError):
        psodm_step(0, 1, binary, graph=[[1], [0]], rng=np.random.default_rng())
    with pytest.raises(ModelMismatchError):
        gadm_step(0, 1, real, rng=np.random.default_rng())


def _gn_setup(mu=0.3, seed=0, epochs=3):
    g, _ = generate_gn(GnConfig(mu, seed))
    return g, build_event_stream(g, epochs, seed)


@pytest.mark.parametrize("model", ["GADM", "EGADM", "PSODM"])
def test_gain_conservation_and_representation(model):
    g, s = _gn_setup()
    f = example_hdf()
    gains = np.zeros(g.n)

    def hook(u, v, gu, gv, state):
        gains[u] += gu
        gains[v] += gv
        if state.binary:
            assert set(np.unique(state.vectors)) <= {0.0, 1.0}
        else:
            assert state.vectors.min() >= 0.0 and state.vectors.max() <= 1.0

    cfg = ModelConfig(model=model, runs=1, epochs=3, seed=4)
    res = run_diffusion(cfg, g, s, f, step_hook=hook)
    assert np.allclose(res.info.entries.sum(axis=1), gains, atol=1e-9)
    assert (res.info.entries >= 0).all()
    init = DiffusionState.initialize(g.n, f, model, "uniform", np.random.default_rng(4))
    assert np.allclose(gains, np.array(res.state.fitness) - np.array(init.fitness), atol=1e-9)


@pytest.mark.parametrize("model", ["GADM", "EGADM", "PSODM"])
def test_trajectory_non_decreasing(model):
    for seed in range(5):
        g, s = _gn_setup(seed=seed)
        res = run_diffusion(ModelConfig(model=model, runs=1, seed=seed), g, s, example_hdf())
        totals = [t for _, t in res.trajectory]
        assert all(b >= a - 1e-9 for a, b in zip(totals, totals[1:]))
        assert res.trajectory[0][0] == 0


@pytest.mark.parametrize("model", ["GADM", "EGADM", "PSODM"])
def test_local_optimum_start_accepts_nothing(model):
    f = _hdf(("11********", -3.0), ("*****1****", -1.0))
    g, s = _gn_setup(epochs=2)
    res = run_diffusion(ModelConfig(model=model, runs=2, init="zero", seed=1), g, s, f)
    assert not res.info.entries.any()
    assert len({t for _, t in res.trajectory}) == 1
    assert res.accepted == [0, 0]


def test_runs_average_and_determinism():
    g, s = _gn_setup()
    f = example_hdf()
    a = run_diffusion(ModelConfig(runs=3, seed=8), g, s, f)
    b = run_diffusion(ModelConfig(runs=3, seed=8), g, s, f)
    assert np.array_equal(a.info.entries, b.info.entries)
    singles = [run_diffusion(ModelConfig(runs=1, seed=8 ^ k), g, s, f).info.entries for k in range(3)]
    assert np.allclose(a.info.entries, sum(singles) / 3)


def test_dynamic_stream_without_graph():
    stream = EventStream.from_events([(0, 1, 0), (1, 2, 1), (2, 3, 2), (0, 3, 3)] * 5, n=4)
    res = run_diffusion(ModelConfig(runs=2, seed=3), None, stream, example_hdf())
    assert res.info.n == 4


def test_config_validation():
    with pytest.raises(ConfigError):
        ModelConfig(model="XYZ")
    with pytest.raises(ConfigError):
        ModelConfig(p_m=2.0)
    g, s = _gn_setup()
    with pytest.raises(ConfigError):
        run_diffusion(ModelConfig(beta=4), g, s, example_hdf())


def test_info_matrix_tsv_and_merge():
    rng = np.random.default_rng(0)
    parts = [InfoMatrix(5) for _ in range(3)]
    mats = []
    for p in parts:
        m = rng.random((5, 5)) * (rng.random((5, 5)) < 0.4)
        np.fill_diagonal(m, 0.0)
        mats.append(m)
        p.add_run(m)
    left = parts[0].merge(parts[1]).merge(parts[2]).finalize()
    right = parts[0].merge(parts[1].merge(parts[2])).finalize()
    assert np.allclose(left.entries, right.entries)
    assert np.allclose(left.entries, sum(mats) / 3)
    back = InfoMatrix.from_tsv(left.to_tsv())
    assert np.array_equal(back.entries, left.entries) and back.run_count == 3
    with pytest.raises(StateError):
        InfoMatrix(2).finalize()
