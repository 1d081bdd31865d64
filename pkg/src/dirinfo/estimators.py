"""k-nearest-neighbor estimators of mutual information and conditional MI.

Both estimators use the max-norm, the k-th neighbor distance in the joint
space and strict range counts in the marginal spaces. The unconditional
estimator is the conditional one with an empty conditioning block, so the
two agree bit for bit.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import neighbors

EULER_GAMMA = 0.57721566490153286061
MAX_JITTER_SCALE = 1e-6

# asymptotic series coefficients B_2j / (2j) for j = 1..7
_ASYMPTOTIC = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12)
_SHIFT_TO = 10.0


class EstimationError(ArithmeticError):
    """The cloud cannot be estimated as given."""


def digamma(x):
    """Digamma function for positive arguments.

    Recurrence up to ``x >= 10`` followed by the asymptotic series, good to
    about 1e-15 absolute on ``x >= 1``.

    Parameters
    ----------
    x : float or array_like
        Strictly positive values.

    Examples
    --------
    >>> round(float(digamma(1.0)), 11)
    -0.5772156649
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("digamma is defined here only for finite x > 0")
    z = np.array(arr, dtype=np.float64, ndmin=1)
    acc = np.zeros_like(z)
    small = z < _SHIFT_TO
    while np.any(small):
        acc[small] -= 1.0 / z[small]
        z[small] += 1.0
        small = z < _SHIFT_TO
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    for c in reversed(_ASYMPTOTIC):
        series = (series + c) * inv2
    out = np.log(z) - 0.5 / z - series + acc
    return float(out[0]) if np.ndim(x) == 0 else out.reshape(arr.shape)


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings of the k-NN estimators.

    Parameters
    ----------
    k : int
        Neighbor rank, at least 1 and below the sample count.
    jitter_scale : float
        Tie-breaking noise amplitude relative to each column's spread, in
        ``[0, 1e-6]``.
    seed : int
        Seed of the tie-breaking noise.
    method : {"auto", "tree", "brute"}
        Neighbor search backend; every choice gives identical counts.
    """

    k: int = 4
    jitter_scale: float = 1e-10
    seed: int = 0
    method: str = "auto"
    metric: str = "max"

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not 0 <= self.jitter_scale <= MAX_JITTER_SCALE:
            raise ValueError(f"jitter_scale must lie in [0, {MAX_JITTER_SCALE}]")
        if self.metric != "max":
            raise ValueError("only the max-norm metric is supported")
        neighbors.resolve_method(self.method)
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")

    def to_dict(self):
        return {"k": int(self.k), "jitter_scale": float(self.jitter_scale),
                "seed": int(self.seed), "metric": self.metric}


def _column_scale(a):
    scale = a.std(axis=0)
    scale[scale == 0] = np.abs(a).max(axis=0)[scale == 0]
    scale[scale == 0] = 1.0
    return scale


def jitter_cloud(cloud, scale, seed):
    """Add seeded uniform noise of relative size ``scale`` to every entry.

    Rows are first put into lexicographic order and the noise is drawn in
    that order, so the jittered multiset of rows does not depend on how the
    input rows were ordered.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if scale == 0 or cloud.size == 0:
        return cloud.copy()
    order = np.lexsort(cloud.T[::-1])
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
    noise = rng.uniform(-1.0, 1.0, size=cloud.shape)
    ordered = cloud[order]
    out = np.empty_like(cloud)
    out[order] = ordered + noise * (scale * _column_scale(ordered))
    return out


def jitter_series(values, scale, seed):
    """Per-channel noise on a T x M recording, one stream per channel.

    Applied before embedding so that every lagged copy of a sample carries
    the same perturbation and swapping channel roles permutes columns only.
    """
    values = np.asarray(values, dtype=np.float64)
    if scale == 0:
        return values.copy()
    streams = np.random.SeedSequence(int(seed)).spawn(values.shape[1])
    noise = np.column_stack([np.random.Generator(np.random.Philox(s)).uniform(-1.0, 1.0, values.shape[0])
                             for s in streams])
    return values + noise * (scale * _column_scale(values))


def check_distinct(cloud):
    """Raise if two rows of the joint cloud coincide."""
    if cloud.shape[0] < 2 or cloud.shape[1] == 0:
        return
    order = np.lexsort(cloud.T[::-1])
    s = cloud[order]
    dup = np.all(s[1:] == s[:-1], axis=1)
    if np.any(dup):
        raise EstimationError(
            f"{int(dup.sum())} duplicate points in the joint cloud; "
            "increase jitter_scale to break ties")


def cmi_from_counts(k, nxz, nyz, nz):
    """psi(k) - <psi(n_xz + 1) + psi(n_yz + 1) - psi(n_z + 1)>.

    The three count vectors are merged into one signed histogram first, so
    the sum does not depend on point order and is exactly reproducible.
    """
    nxz, nyz, nz = (np.asarray(a, dtype=np.int64) for a in (nxz, nyz, nz))
    n = len(nxz)
    size = int(max(nxz.max(), nyz.max(), nz.max())) + 2
    hist = (np.bincount(nxz + 1, minlength=size) + np.bincount(nyz + 1, minlength=size)
            - np.bincount(nz + 1, minlength=size))
    v = np.flatnonzero(hist)
    if v.size == 0:
        return digamma(float(k))
    terms = hist[v] * digamma(v.astype(np.float64))
    return digamma(float(k)) - math.fsum(terms.tolist()) / n


def _prepare(arrays):
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2:
            raise ValueError("clouds must be 1-D or 2-D arrays")
        out.append(a)
    n = out[0].shape[0]
    if any(a.shape[0] != n for a in out):
        raise ValueError("clouds must share their row count")
    if not all(np.all(np.isfinite(a)) for a in out):
        raise ValueError("clouds contain non-finite values")
    return out


def counts_cmi(x, y, z, k, method="auto"):
    """Joint k-th neighbor radius and the three conditional range counts."""
    n = x.shape[0]
    joint = np.hstack([x, y, z])
    eps = neighbors.knn_radius(joint, k, method=method)
    nxz = neighbors.range_count(np.hstack([x, z]), eps, method=method)
    nyz = neighbors.range_count(np.hstack([y, z]), eps, method=method)
    if z.shape[1]:
        nz = neighbors.range_count(z, eps, method=method)
    else:
        nz = np.full(n, n - 1, dtype=np.int64)
    return eps, nxz, nyz, nz


def fp_cmi_raw(x, y, z, k, method="auto"):
    """Conditional MI on clouds taken as they are, without added noise."""
    x, y, z = _prepare([x, y, z])
    n = x.shape[0]
    if not 1 <= k < n:
        raise EstimationError(f"need 1 <= k < n, got k={k}, n={n}")
    if x.shape[1] == 0 or y.shape[1] == 0:
        raise ValueError("x and y clouds need at least one column")
    check_distinct(np.hstack([x, y, z]))
    _, nxz, nyz, nz = counts_cmi(x, y, z, k, method)
    return cmi_from_counts(k, nxz, nyz, nz)


def _split_jitter(cfg, x, y, z):
    joint = jitter_cloud(np.hstack([x, y, z]), cfg.jitter_scale, cfg.seed)
    dx, dy = x.shape[1], y.shape[1]
    return joint[:, :dx], joint[:, dx:dx + dy], joint[:, dx + dy:]


def fp_cmi(X, Y, Z=None, cfg=None):
    """Frenzel-Pompe estimate of I(X; Y | Z) in nats.

    Parameters
    ----------
    X, Y : array_like, shape (n,) or (n, d)
    Z : array_like, shape (n, dz), optional
        Conditioning cloud; ``None`` or zero columns gives the KSG
        estimate of I(X; Y).
    cfg : EstimatorConfig, optional

    Raises
    ------
    EstimationError
        ``k >= n`` or duplicate rows survive the jitter.
    """
    cfg = EstimatorConfig() if cfg is None else cfg
    if Z is None:
        Z = np.empty((np.shape(X)[0], 0))
    x, y, z = _prepare([X, Y, Z])
    x, y, z = _split_jitter(cfg, x, y, z)
    return fp_cmi_raw(x, y, z, cfg.k, cfg.method)


def ksg_mi(X, Y, cfg=None):
    """Kraskov-Stoegbauer-Grassberger estimate (first algorithm) of I(X; Y)."""
    return fp_cmi(X, Y, None, cfg)
