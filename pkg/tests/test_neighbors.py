import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from dirinfo.neighbors import (FixedBlockIndex, brute_cmi_counts, brute_knn_lists, knn_lists,
                               knn_radius, neighbor_stats, range_count)

METHODS = ["tree", "brute"]


def scipy_stats(points, k):
    tree = cKDTree(points)
    d, _ = tree.query(points, k=k + 1, p=np.inf)
    eps = d[:, k]
    strict = np.nextafter(eps, 0)
    counts = tree.query_ball_point(points, strict, p=np.inf, return_length=True) - 1
    return eps, counts


@pytest.mark.parametrize("method", METHODS)
def test_hand_example(method):
    pts = np.array([[0.0], [1.0], [3.0]])
    assert knn_radius(pts, 1, method=method).tolist() == [1.0, 1.0, 2.0]
    assert range_count(pts, [1.5, 0.0, 0.0], method=method)[0] == 1


@pytest.mark.parametrize("method", METHODS)
def test_matches_scipy_on_random_cloud(method, rng):
    pts = rng.standard_normal((1000, 3))
    eps, counts = neighbor_stats(pts, 4, method=method)
    ref_eps, ref_counts = scipy_stats(pts, 4)
    assert np.array_equal(eps, ref_eps)
    assert np.array_equal(counts, ref_counts)


clouds = st.builds(
    lambda n, d, seed, grid: (np.round(np.random.default_rng(seed).standard_normal((n, d)) * grid)
                              if grid else np.random.default_rng(seed).standard_normal((n, d))),
    st.integers(6, 300), st.integers(1, 5), st.integers(0, 2**32 - 1), st.sampled_from([0, 1, 3]))


@given(clouds, st.integers(1, 5))
def test_tree_equals_brute(points, k):
    """Integer grids produce many exact ties, the hard case for strict counts."""
    eps_t, cnt_t = neighbor_stats(points, k, method="tree")
    eps_b, cnt_b = neighbor_stats(points, k, method="brute")
    assert np.array_equal(eps_t, eps_b)
    assert np.array_equal(cnt_t, cnt_b)
    radii = np.abs(points[:, 0]) + 0.5
    assert np.array_equal(range_count(points, radii, method="tree"),
                          range_count(points, radii, method="brute"))


@given(clouds, st.integers(1, 20))
def test_knn_lists_agree(points, m):
    m = min(m, len(points) - 1)
    it, dt = knn_lists(points, m, method="tree")
    ib, db = brute_knn_lists(points, m)
    assert np.array_equal(dt, db)
    # indices may differ only among equal distances
    full = np.abs(points[:, None, :] - points[None]).max(axis=2)
    assert np.array_equal(np.take_along_axis(full, it, axis=1), dt)
    assert np.all(it != np.arange(len(points))[:, None])


def test_knn_lists_large_sampled_path(rng):
    """Large n takes the sampled-threshold branch of the list builder."""
    pts = rng.standard_normal((3000, 4))
    it, dt = knn_lists(pts, 40, method="tree")
    ib, db = brute_knn_lists(pts, 40)
    assert np.array_equal(dt, db)
    assert np.array_equal(it, ib)


def split(seed, n, dx, dy, dzr, dzf, grid):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, dx + dy + dzr + dzf))
    if grid:
        a = np.round(a * grid)
    return a[:, :dx], a[:, dx:dx + dy], a[:, dx + dy:dx + dy + dzr], a[:, dx + dy + dzr:]


@given(st.integers(0, 2**32 - 1), st.integers(10, 250), st.integers(1, 3), st.integers(1, 2),
       st.integers(0, 3), st.integers(1, 3), st.integers(1, 6), st.integers(2, 64),
       st.sampled_from([0, 2]), st.sampled_from(METHODS))
def test_fixed_block_index_is_exact(seed, n, dx, dy, dzr, dzf, k, m, grid, method):
    k = min(k, n - 1)
    x, y, zr, zf = split(seed, n, dx, dy, dzr, dzf, grid)
    index = FixedBlockIndex(zf, m=m, method=method)
    got = index.cmi_counts(x, y, zr, k)
    ref = brute_cmi_counts(x, y, np.hstack([zf, zr]), k)
    for g, r in zip(got, ref):
        assert np.array_equal(g, r)


def test_short_lists_are_extended(rng):
    x, y, zr, zf = split(1, 400, 2, 1, 2, 1, 0)
    index = FixedBlockIndex(zf, m=4, method="tree")
    got = index.cmi_counts(x, y, zr, 4)
    assert index.last_extended > 0
    for g, r in zip(got, brute_cmi_counts(x, y, np.hstack([zf, zr]), 4)):
        assert np.array_equal(g, r)


def test_brute_cmi_counts_definition():
    x = np.array([[0.0], [1.0], [3.0]])
    y = np.array([[0.0], [2.0], [3.0]])
    eps, nxz, nyz, nz = brute_cmi_counts(x, y, np.empty((3, 0)), 1)
    assert eps.tolist() == [2.0, 2.0, 2.0]
    assert nxz.tolist() == [1, 1, 0]
    assert nyz.tolist() == [0, 1, 1]
    assert nz.tolist() == [2, 2, 2]


def test_input_validation():
    with pytest.raises(ValueError):
        knn_radius(np.zeros((3, 1)), 3)
    with pytest.raises(ValueError, match="non-finite"):
        knn_radius(np.array([[0.0], [np.nan], [1.0]]), 1)
    with pytest.raises(ValueError):
        knn_radius(np.zeros((3, 1)), 1, method="ball")
