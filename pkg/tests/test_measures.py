import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirinfo.estimators import EstimatorConfig
from dirinfo.gaussian_oracle import (analytic_rate, correlated_noise_model, independent_model,
                                     ring_model, simulate_var, white_source_model)
from dirinfo.inference import InferenceConfig, edge_pvalue
from dirinfo.measures import (MeasureEstimate, ShiftStatistic, directed_info_rate, estimate_rate,
                              instantaneous_exchange_rate, perturb, transfer_entropy_rate)
from dirinfo.timeseries import DataError, EmbeddingSpec, TimeSeriesSet, standardize

LAG2 = EmbeddingSpec.uniform(2)


@pytest.fixture(scope="module")
def ring_data():
    return simulate_var(ring_model(), 10_000, seed=11)


def small_ring(seed, T=300):
    return simulate_var(ring_model(), T, seed=seed)


@given(st.integers(0, 10_000), st.integers(1, 3), st.booleans())
def test_di_is_te_plus_iie_exactly(seed, lag, present):
    ts = small_ring(seed)
    spec = EmbeddingSpec.uniform(lag, cond_includes_present=present)
    est = EstimatorConfig(seed=seed % 7)
    di = directed_info_rate(ts, "x", "y", ("z",), spec, est)
    assert di.value - (di.te + di.iie) == 0.0
    assert di.te == transfer_entropy_rate(ts, "x", "y", ("z",), spec, est).value
    assert di.iie == instantaneous_exchange_rate(ts, "x", "y", ("z",), spec, est).value


@given(st.integers(0, 10_000), st.sampled_from([(), ("z",)]))
def test_iie_exchange_symmetry_is_exact(seed, cond):
    ts = small_ring(seed)
    est = EstimatorConfig(seed=seed % 5)
    a = instantaneous_exchange_rate(ts, "x", "y", cond, LAG2, est)
    b = instantaneous_exchange_rate(ts, "y", "x", cond, LAG2, est)
    assert a.value == b.value


def test_affine_rescaling_invariance():
    ts = simulate_var(ring_model(), 2000, seed=3)
    scaled = TimeSeriesSet(ts.values * np.array([3.0, -0.2, 50.0]) + np.array([7.0, 1.0, -4.0]),
                           ts.names)
    for kind in ("TE", "IIE", "DI"):
        a = estimate_rate(standardize(ts), kind, "x", "y", ("z",), LAG2)
        b = estimate_rate(standardize(scaled), kind, "x", "y", ("z",), LAG2)
        assert a.value == pytest.approx(b.value, abs=1e-9)


def test_white_source_te():
    ts = simulate_var(white_source_model(1.0), 10_000, seed=5)
    te = transfer_entropy_rate(ts, "x", "y", (), LAG2).value
    assert te == pytest.approx(0.5 * math.log(2), abs=0.05)


def test_correlated_noise_iie():
    ts = simulate_var(correlated_noise_model(0.6), 10_000, seed=6)
    iie = instantaneous_exchange_rate(ts, "x", "y", (), LAG2).value
    assert iie == pytest.approx(-0.5 * math.log(1 - 0.36), abs=0.05)


def null_spread(ts, kind, source, target, cond, n=49):
    stat = ShiftStatistic(perturb(ts, EstimatorConfig()), kind, source, target, cond, LAG2,
                          EstimatorConfig())
    rng = np.random.default_rng(0)
    shifts = rng.choice(np.arange(1000, 9001), size=n, replace=False)
    return stat.value(0), np.array([stat.value(int(s)) for s in shifts])


def test_ring_conditional_te_vanishes(ring_data):
    observed, null = null_spread(ring_data, "TE", "y", "x", ("z",))
    assert abs(observed) <= 3 * null.std(ddof=1)


def test_ring_iie_vanishes(ring_data):
    observed, null = null_spread(ring_data, "IIE", "x", "y", ("z",))
    assert abs(observed) <= 3 * null.std(ddof=1)


def test_ring_conditional_te_detected(ring_data):
    cfg = InferenceConfig(spec=LAG2, seed=1)
    res = edge_pvalue(ring_data, "directed", ("z", "x"), ("y",), cfg)
    assert res.statistic > np.quantile(res.null, 0.99)
    assert res.p_value == pytest.approx(0.01)


def test_correlated_ring_di_addends():
    cov = [[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]]
    model = ring_model(noise_cov=cov)
    ts = simulate_var(model, 10_000, seed=8)
    di = directed_info_rate(ts, "x", "y", ("z",), LAG2)
    assert di.te > 0 and di.iie > 0
    assert di.te == pytest.approx(analytic_rate(model, "TE", "x", "y", ("z",), LAG2), abs=0.05)
    assert di.iie == pytest.approx(analytic_rate(model, "IIE", "x", "y", ("z",), LAG2), abs=0.05)


def test_independent_channels_di_near_zero():
    ts = simulate_var(independent_model(3), 5000, seed=9)
    di = directed_info_rate(ts, "x1", "x2", ("x3",), LAG2)
    assert abs(di.value) < 0.03


def test_estimate_schema(ring_data):
    est = transfer_entropy_rate(ring_data, "x", "y", ["z"])
    assert isinstance(est, MeasureEstimate)
    d = est.to_dict()
    assert set(d) == {"kind", "source", "target", "cond", "value_nats", "te_nats", "iie_nats",
                      "spec", "estimator", "n_effective"}
    assert d["kind"] == "TE" and d["cond"] == ["z"] and d["iie_nats"] is None
    assert d["n_effective"] == 10_000 - 3
    assert d["spec"]["source_includes_present"] is False


def test_channels_by_index_are_named():
    ts = small_ring(1)
    assert transfer_entropy_rate(ts, 0, 1, (2,)).source == "x"
    assert transfer_entropy_rate(ts, 0, 1, (2,)).value == \
        transfer_entropy_rate(ts, "x", "y", ("z",)).value


def test_errors_propagate():
    ts = small_ring(2)
    with pytest.raises(DataError):
        transfer_entropy_rate(ts, "x", "x")
    with pytest.raises(DataError):
        transfer_entropy_rate(ts, "x", "y", ("y",))
    with pytest.raises(ValueError):
        estimate_rate(ts, "MI", "x", "y")


def test_shift_statistic_matches_direct_estimate():
    ts = small_ring(4, T=500)
    est = EstimatorConfig(seed=2)
    for kind in ("TE", "IIE"):
        stat = ShiftStatistic(perturb(ts, est), kind, "x", "y", ("z",), LAG2, est, list_size=8)
        assert stat.value(0) == estimate_rate(ts, kind, "x", "y", ("z",), LAG2, est).value
        rolled = ts.with_column("x", np.roll(ts.column("x"), 123))
        direct = estimate_rate(TimeSeriesSet(perturb(ts, est).values, ts.names).with_column(
            "x", np.roll(perturb(ts, est).column("x"), 123)), kind, "x", "y", ("z",), LAG2,
            EstimatorConfig(jitter_scale=0.0))
        assert stat.value(123) == direct.value
        assert rolled.sample_count == ts.sample_count
