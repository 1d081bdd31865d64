import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirinfo.estimators import EstimatorConfig
from dirinfo.gaussian_oracle import independent_model, ring_model, simulate_var
from dirinfo.graph import DIRECTED, UNDIRECTED
from dirinfo.inference import (InferenceConfig, bh_adjust, bonferroni, circular_shift_surrogate,
                               draw_shifts, edge_pvalue, infer_graph, rank_pvalue, shift_band,
                               edge_seed)
from dirinfo.timeseries import DataError, EmbeddingSpec, TimeSeriesSet

LAG2 = EmbeddingSpec.uniform(2)
FAST = InferenceConfig(spec=LAG2, n_surrogates=19, seed=3)


def test_surrogate_rotation_example():
    ts = TimeSeriesSet.from_array([[1.0, 5.0], [2.0, 6.0], [3.0, 7.0], [4.0, 8.0]])
    out = circular_shift_surrogate(ts, 0, 2)
    assert out.values[:, 0].tolist() == [3.0, 4.0, 1.0, 2.0]
    assert out.values[:, 1].tolist() == [5.0, 6.0, 7.0, 8.0]


@pytest.mark.parametrize("shift", [0, 1, 99, 100, -5])
def test_surrogate_band(shift):
    ts = TimeSeriesSet.from_array(np.arange(100.0)[:, None])
    with pytest.raises(ValueError):
        circular_shift_surrogate(ts, 0, shift)


def circular_autocov(x, lag):
    x = x - x.mean()
    return np.mean(x * np.roll(x, lag))


@given(st.integers(0, 1000), st.integers(10, 90))
def test_surrogate_preserves_circular_structure(seed, shift):
    x = np.random.default_rng(seed).standard_normal(100)
    ts = TimeSeriesSet.from_array(x[:, None])
    y = circular_shift_surrogate(ts, 0, shift).column(0)
    assert sorted(y) == sorted(x)
    assert circular_autocov(y, 1) == pytest.approx(circular_autocov(x, 1), abs=1e-12)


def test_rank_pvalue():
    assert rank_pvalue(5.0, np.zeros(99)) == 0.01
    assert rank_pvalue(0.0, np.zeros(99)) == 1.0
    assert rank_pvalue(1.0, [0.0, 1.0, 2.0, 0.5]) == 3 / 5


def test_bh_examples():
    assert bh_adjust([0.001, 0.02, 0.04, 0.2], 0.05).tolist() == [True, True, False, False]
    assert not bh_adjust([1.0] * 6, 0.05).any()
    assert bh_adjust([0.01], 0.05).tolist() == [True]
    assert bh_adjust([], 0.05).tolist() == []


def bh_bruteforce(p, q):
    """Largest i with p_(i) <= i q / m, found by trying every i."""
    m = len(p)
    srt = sorted(p)
    best = 0
    for i in range(1, m + 1):
        if srt[i - 1] <= i * q / m:
            best = i
    cut = srt[best - 1] if best else -1.0
    return [v <= cut for v in p]


@given(st.lists(st.sampled_from([i / 100 for i in range(1, 101)]), max_size=30),
       st.sampled_from([0.01, 0.05, 0.1, 0.2]))
def test_bh_matches_definition(p, q):
    got = bh_adjust(p, q)
    assert got.tolist() == bh_bruteforce(p, q)
    assert np.all(got >= bonferroni(p, q))
    # order of the inputs does not matter
    perm = np.random.default_rng(len(p)).permutation(len(p))
    assert bh_adjust(np.array(p)[perm], q).tolist() == got[perm].tolist()


def test_draw_shifts():
    lo, hi = shift_band(1000, 0.1)
    assert (lo, hi) == (100, 900)
    s = draw_shifts(1000, 99, 0.1, edge_seed(0, DIRECTED, 0, 1))
    assert len(set(s.tolist())) == 99 and s.min() >= lo and s.max() <= hi
    assert np.array_equal(s, draw_shifts(1000, 99, 0.1, edge_seed(0, DIRECTED, 0, 1)))
    assert not np.array_equal(s, draw_shifts(1000, 99, 0.1, edge_seed(0, UNDIRECTED, 0, 1)))
    with pytest.raises(DataError):
        draw_shifts(100, 99, 0.1, edge_seed(0, DIRECTED, 0, 1))


@pytest.mark.parametrize("kwargs", [{"n_surrogates": 18}, {"alpha": 0.0}, {"alpha": 1.0},
                                    {"correction": "holm"}, {"min_shift": 0.5},
                                    {"min_shift": 0.0}, {"seed": -1}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        InferenceConfig(**kwargs)


@pytest.fixture(scope="module")
def ring_small():
    return simulate_var(ring_model(), 1500, seed=21)


@pytest.fixture(scope="module")
def ring_graph(ring_small):
    return infer_graph(ring_small, FAST)


def test_graph_is_deterministic(ring_small, ring_graph):
    again = infer_graph(ring_small, FAST)
    assert again.same_edges(ring_graph)
    for key, res in ring_graph.results.items():
        assert again.results[key].p_value == res.p_value
        assert np.array_equal(again.results[key].null, res.null)


def test_graph_runs_every_test(ring_graph):
    kinds = [k for k, _ in ring_graph.results]
    assert kinds.count(DIRECTED) == 6 and kinds.count(UNDIRECTED) == 3
    for res in ring_graph.results.values():
        assert res.p_value >= 1 / 20
        assert res.n_surrogates == 19
        assert res.p_value == rank_pvalue(res.statistic, res.null)


def test_edges_carry_reject_flags(ring_graph):
    for kind, edges in ((DIRECTED, ring_graph.directed), (UNDIRECTED, ring_graph.undirected)):
        for pair in edges:
            assert ring_graph.results[(kind, pair)].reject
    for (kind, pair), res in ring_graph.results.items():
        assert res.reject == (pair in (ring_graph.directed if kind == DIRECTED
                                       else ring_graph.undirected))


def test_families_are_corrected_separately(ring_graph):
    for kind in (DIRECTED, UNDIRECTED):
        res = [r for (k, _), r in sorted(ring_graph.results.items()) if k == kind]
        flags = bh_adjust([r.p_value for r in res], FAST.alpha)
        assert flags.tolist() == [r.reject for r in res]


def test_single_edge_test_matches_graph(ring_small, ring_graph):
    """Per-test seeds do not depend on the order tests are run in."""
    for kind, pair in [(DIRECTED, ("y", "z")), (UNDIRECTED, ("x", "z"))]:
        alone = edge_pvalue(ring_small, kind, pair, cfg=FAST)
        inside = ring_graph.results[(kind, pair)]
        assert alone.statistic == inside.statistic
        assert alone.p_value == inside.p_value


def test_undirected_statistic_is_symmetric(ring_small):
    a = edge_pvalue(ring_small, UNDIRECTED, ("x", "y"), cfg=FAST)
    b = edge_pvalue(ring_small, UNDIRECTED, ("y", "x"), cfg=FAST)
    assert a.statistic == b.statistic


def test_edge_pvalue_validation(ring_small):
    with pytest.raises(DataError):
        edge_pvalue(ring_small, DIRECTED, ("x", "x"), cfg=FAST)
    with pytest.raises(ValueError):
        edge_pvalue(ring_small, "bidirected", ("x", "y"), cfg=FAST)
    with pytest.raises(DataError):
        infer_graph(TimeSeriesSet.from_array(np.zeros((50, 1)) + np.arange(50)[:, None]), FAST)


def test_strong_edge_reaches_minimum_pvalue():
    ts = simulate_var(ring_model(), 10_000, seed=4)
    res = edge_pvalue(ts, DIRECTED, ("z", "x"), ("y",), InferenceConfig(spec=LAG2, seed=4))
    assert res.p_value == 0.01


def test_independent_channels_give_empty_graph():
    empty = 0
    cfg = InferenceConfig(spec=LAG2, n_surrogates=49)
    for seed in range(10):
        g = infer_graph(simulate_var(independent_model(3), 2000, seed=100 + seed),
                        InferenceConfig(**{**cfg.__dict__, "seed": seed}))
        empty += not (g.directed or g.undirected)
    assert empty >= 9


def test_bonferroni_option(ring_small):
    cfg = InferenceConfig(spec=LAG2, n_surrogates=19, seed=3, correction="bonferroni")
    g = infer_graph(ring_small, cfg)
    for (kind, _), res in g.results.items():
        m = 6 if kind == DIRECTED else 3
        assert res.reject == (res.p_value <= cfg.alpha / m)


def test_pairs_cover_all_ordered_pairs(ring_graph):
    directed = {p for k, p in ring_graph.results if k == DIRECTED}
    assert directed == set(itertools.permutations("xyz", 2))
