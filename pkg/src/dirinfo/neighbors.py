"""Max-norm neighbor statistics: k-th neighbor distances and range counts.

Two interchangeable paths are provided. ``"brute"`` is plain numpy and is
kept as the reference; ``"tree"`` is a numba kd-tree. ``"auto"`` picks the
tree when numba is enabled (see :mod:`dirinfo._accel`) and falls back to
brute force otherwise. Both paths return identical integers and bit-equal
distances, since a max-norm distance is a single rounded subtraction.
"""
import numpy as np

from . import _accel

if _accel.HAVE_NUMBA:
    from . import _kernels_numba as _nk
else:  # pragma: no cover
    _nk = None

# number of pairwise distance entries materialized per brute-force block
_BLOCK_ENTRIES = 2_000_000


def _as_cloud(points):
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise ValueError("point cloud must be a 2-D array")
    if not np.all(np.isfinite(points)):
        raise ValueError("point cloud contains non-finite values")
    return points


def resolve_method(method):
    if method == "auto":
        return "tree" if _accel.USE_NUMBA else "brute"
    if method == "tree" and _nk is None:  # pragma: no cover
        raise RuntimeError("tree method requires numba")
    if method not in ("tree", "brute"):
        raise ValueError(f"unknown neighbor method {method!r}")
    return method


def _blocks(n, width):
    step = max(1, _BLOCK_ENTRIES // max(1, width))
    for s in range(0, n, step):
        yield s, min(n, s + step)


def _self_excluded_dist(points, s, e):
    dist = np.abs(points[s:e, None, :] - points[None, :, :]).max(axis=2)
    rows = np.arange(e - s)
    dist[rows, rows + s] = np.inf
    return dist


def brute_knn_radius(points, k):
    n, d = points.shape
    out = np.empty(n)
    for s, e in _blocks(n, n * d):
        dist = _self_excluded_dist(points, s, e)
        out[s:e] = np.partition(dist, k - 1, axis=1)[:, k - 1]
    return out


def brute_range_count(points, radii):
    n, d = points.shape
    out = np.empty(n, dtype=np.int64)
    for s, e in _blocks(n, n * d):
        dist = _self_excluded_dist(points, s, e)
        out[s:e] = np.count_nonzero(dist < radii[s:e, None], axis=1)
    return out


def brute_knn_lists(points, m):
    n, d = points.shape
    out_i = np.empty((n, m), dtype=np.int64)
    out_d = np.empty((n, m))
    for s, e in _blocks(n, n * d):
        dist = _self_excluded_dist(points, s, e)
        if m < n - 1:
            part = np.argpartition(dist, m - 1, axis=1)[:, :m]
        else:
            part = np.argsort(dist, axis=1, kind="stable")[:, :m]
        pd = np.take_along_axis(dist, part, axis=1)
        order = np.argsort(pd, axis=1, kind="stable")
        out_i[s:e] = np.take_along_axis(part, order, axis=1)
        out_d[s:e] = np.take_along_axis(pd, order, axis=1)
    return out_i, out_d


def knn_radius(points, k, method="auto"):
    """Max-norm distance from each point to its k-th nearest other point.

    Parameters
    ----------
    points : array_like, shape (n, d)
    k : int
        Neighbor rank, ``1 <= k < n``.
    method : {"auto", "tree", "brute"}

    Returns
    -------
    ndarray, shape (n,)

    Examples
    --------
    >>> knn_radius([[0.0], [1.0], [3.0]], 1, method="brute").tolist()
    [1.0, 1.0, 2.0]
    """
    points = _as_cloud(points)
    n = points.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n, got k={k}, n={n}")
    if points.shape[1] == 0:
        return np.zeros(n)
    if resolve_method(method) == "tree":
        return _nk.tree_knn_radius(points, int(k), _nk.n_chunks_for(n))
    return brute_knn_radius(points, int(k))


def range_count(points, radii, method="auto"):
    """Count the other points at max-norm distance strictly below ``radii``."""
    points = _as_cloud(points)
    n = points.shape[0]
    radii = np.ascontiguousarray(np.broadcast_to(radii, (n,)), dtype=np.float64)
    if points.shape[1] == 0:
        return np.where(radii > 0, n - 1, 0).astype(np.int64)
    if resolve_method(method) == "tree":
        return _nk.tree_range_count(points, radii, _nk.n_chunks_for(n))
    return brute_range_count(points, radii)


def neighbor_stats(points, k, radii=None, method="auto"):
    """k-th neighbor distances and strict range counts in one call.

    When ``radii`` is None the counts are taken at the k-th neighbor
    distances themselves.
    """
    eps = knn_radius(points, k, method=method)
    counts = range_count(points, eps if radii is None else radii, method=method)
    return eps, counts


def knn_lists(points, m, method="auto"):
    """Indices and distances of the ``m`` nearest other points, ascending.

    Ties at equal distance may be listed in any order.
    """
    points = _as_cloud(points)
    n = points.shape[0]
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    if resolve_method(method) == "tree":
        return _nk.select_knn_lists(np.ascontiguousarray(points.T), int(m),
                                    _nk.n_chunks_for(n))
    return brute_knn_lists(points, int(m))


def brute_cmi_counts(x, y, z, k):
    """Reference k-NN radius and conditional counts, straight from the definition.

    The radius is the k-th neighbor distance in the joint ``(x, y, z)``
    space; the counts are strict range counts at that radius in the
    ``(x, z)``, ``(y, z)`` and ``z`` subspaces.
    """
    x, y, z = (_as_cloud(a) for a in (x, y, z))
    n = x.shape[0]
    eps = np.empty(n)
    counts = np.empty((3, n), dtype=np.int64)
    width = n * (x.shape[1] + y.shape[1] + z.shape[1] + 1)
    for s, e in _blocks(n, width):
        def block(a):
            if a.shape[1] == 0:
                return np.zeros((e - s, n))
            return _self_excluded_dist(a, s, e)

        dx, dy, dz = block(x), block(y), block(z)
        rows = np.arange(e - s)
        # empty subspaces leave self at distance 0; push it out of every count
        dz[rows, rows + s] = np.inf
        dj = np.maximum(np.maximum(dx, dy), dz)
        kth = np.partition(dj, k - 1, axis=1)[:, k - 1]
        eps[s:e] = kth
        r = kth[:, None]
        counts[0, s:e] = np.count_nonzero(np.maximum(dx, dz) < r, axis=1)
        counts[1, s:e] = np.count_nonzero(np.maximum(dy, dz) < r, axis=1)
        counts[2, s:e] = np.count_nonzero(dz < r, axis=1)
    return eps, counts[0], counts[1], counts[2]


class FixedBlockIndex:
    """Neighbor lists over a conditioning block reused by many estimates.

    Surrogate tests recompute a conditional MI many times while part of the
    conditioning cloud (``fixed``) never changes. The ``m`` nearest
    neighbors of every row in that block are found once; each later call to
    :meth:`cmi_counts` then scans the lists instead of searching the whole
    cloud. Rows whose list is too short are finished by a full scan, so
    results always equal :func:`brute_cmi_counts` exactly.

    Parameters
    ----------
    fixed : array_like, shape (n, d_f)
        Conditioning columns shared by every later call, ``d_f >= 1``.
    m : int
        List length; clipped to ``n - 1``.
    method : {"auto", "tree", "brute"}
    """

    def __init__(self, fixed, m=512, method="auto"):
        self.fixed = _as_cloud(fixed)
        n, d = self.fixed.shape
        if d == 0:
            raise ValueError("fixed block needs at least one column")
        if n < 2:
            raise ValueError("need at least two rows")
        self.method = resolve_method(method)
        self.m = int(min(m, n - 1))
        self._cols = np.ascontiguousarray(self.fixed.T)
        self.cand_i, self.cand_d = knn_lists(self.fixed, self.m, method=self.method)
        self.last_extended = 0

    @property
    def n(self):
        return self.fixed.shape[0]

    def cmi_counts(self, x, y, zrest, k):
        """Radius and counts for clouds ``x``, ``y`` and ``z = [fixed | zrest]``.

        Returns ``(eps, n_xz, n_yz, n_z)``.
        """
        x, y = _as_cloud(x), _as_cloud(y)
        zrest = np.ascontiguousarray(zrest, dtype=np.float64).reshape(self.n, -1)
        for a in (x, y, zrest):
            if a.shape[0] != self.n:
                raise ValueError("row count differs from the fixed block")
        if not 1 <= k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={k}, n={self.n}")
        if self.method == "tree":
            w = np.hstack([x, y, zrest])
            out = _nk.candidate_cmi_counts(self._cols, w, x.shape[1], y.shape[1],
                                           self.cand_i, self.cand_d, int(k),
                                           _nk.n_chunks_for(self.n))
            self.last_extended = int(out[4])
            return out[:4]
        return self._numpy_counts(x, y, zrest, int(k))

    def _numpy_counts(self, x, y, zrest, k):
        n, m = self.cand_i.shape
        if k > m:
            z = np.hstack([self.fixed, zrest])
            self.last_extended = n
            rows = [_brute_row(x, y, z, k, i) for i in range(n)]
            return tuple(np.array(c, dtype=t) for c, t in
                         zip(zip(*rows), (np.float64, np.int64, np.int64, np.int64)))
        eps = np.empty(n)
        nxz = np.empty(n, dtype=np.int64)
        nyz = np.empty(n, dtype=np.int64)
        nz = np.empty(n, dtype=np.int64)
        width = m * (x.shape[1] + y.shape[1] + zrest.shape[1] + 4)
        short = []

        def pair_dist(a, s, e):
            if a.shape[1] == 0:
                return np.zeros((e - s, m))
            return np.abs(a[s:e, None, :] - a[self.cand_i[s:e]]).max(axis=2)

        for s, e in _blocks(n, width):
            cd = self.cand_d[s:e]
            dx = pair_dist(x, s, e)
            dy = pair_dist(y, s, e)
            dz = np.maximum(cd, pair_dist(zrest, s, e))
            dj = np.maximum(np.maximum(dx, dy), dz)
            kth = np.partition(dj, k - 1, axis=1)[:, k - 1]
            eps[s:e] = kth
            r = kth[:, None]
            inside = dz < r
            nxz[s:e] = np.count_nonzero(inside & (dx < r), axis=1)
            nyz[s:e] = np.count_nonzero(inside & (dy < r), axis=1)
            nz[s:e] = np.count_nonzero(inside, axis=1)
            short.extend((s + np.flatnonzero(cd[:, -1] < kth)).tolist())
        if short:
            z = np.hstack([self.fixed, zrest])
            for i in short:
                eps[i], nxz[i], nyz[i], nz[i] = _brute_row(x, y, z, k, i)
        self.last_extended = len(short)
        return eps, nxz, nyz, nz


def _brute_row(x, y, z, k, i):
    n = x.shape[0]
    others = np.r_[0:i, i + 1:n]

    def dist(a):
        if a.shape[1] == 0:
            return np.zeros(n - 1)
        return np.abs(a[others] - a[i]).max(axis=1)

    dx, dy, dz = dist(x), dist(y), dist(z)
    dj = np.maximum(np.maximum(dx, dy), dz)
    e = np.partition(dj, k - 1)[k - 1]
    return (e, np.count_nonzero(np.maximum(dx, dz) < e),
            np.count_nonzero(np.maximum(dy, dz) < e),
            np.count_nonzero(dz < e))
