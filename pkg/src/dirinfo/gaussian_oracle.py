"""Stationary Gaussian VAR models: simulation, autocovariances and exact rates."""
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .graph import CausalityGraph
from .timeseries import EmbeddingSpec, TimeSeriesSet, default_names

if _accel.HAVE_NUMBA:
    from ._kernels_numba import var_recursion as _var_recursion_numba
else:  # pragma: no cover
    _var_recursion_numba = None

LYAPUNOV_TOL = 1e-12
LYAPUNOV_MAX_ITER = 100_000
MAX_ORACLE_LAG = 200
CMI_NEG_TOL = 1e-10


class ModelError(ValueError):
    """Invalid or non-stationary VAR model."""


class OracleError(ArithmeticError):
    """Numerical failure inside the Gaussian oracle."""


@dataclass(frozen=True)
class VarModel:
    """``X_t = sum_k A_k X_{t-k} + e_t`` with ``e_t ~ N(0, noise_cov)``.

    ``coeffs[k - 1]`` is ``A_k``; entry ``[j, i]`` maps channel ``i`` into
    channel ``j``.
    """

    coeffs: np.ndarray
    noise_cov: np.ndarray
    names: tuple = None

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.ndim == 2:
            coeffs = coeffs[None]
        if coeffs.ndim != 3 or coeffs.shape[1] != coeffs.shape[2] or coeffs.shape[0] < 1:
            raise ModelError("coeffs must be a list of p >= 1 square matrices")
        m = coeffs.shape[1]
        cov = np.array(self.noise_cov, dtype=np.float64)
        if cov.shape != (m, m):
            raise ModelError(f"noise_cov must be {m}x{m}")
        if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(cov))):
            raise ModelError("model entries must be finite")
        if np.max(np.abs(cov - cov.T)) > 1e-12:
            raise ModelError("noise_cov is not symmetric")
        cov = (cov + cov.T) / 2
        if np.min(np.linalg.eigvalsh(cov)) <= 0:
            raise ModelError("noise_cov is not positive definite")
        names = default_names(m) if self.names is None else tuple(str(n) for n in self.names)
        if len(names) != m or len(set(names)) != m:
            raise ModelError("names must be unique, one per channel")
        radius = spectral_radius(coeffs)
        if not radius < 1:
            raise ModelError(f"model is not stationary (spectral radius {radius:.6g} >= 1)")
        for a in (coeffs, cov):
            a.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "noise_cov", cov)
        object.__setattr__(self, "names", names)

    @property
    def order(self):
        return self.coeffs.shape[0]

    @property
    def channel_count(self):
        return self.coeffs.shape[1]

    def index(self, channel):
        if isinstance(channel, (int, np.integer)) and not isinstance(channel, bool):
            if not 0 <= channel < self.channel_count:
                raise ModelError(f"channel index {channel} out of range")
            return int(channel)
        try:
            return self.names.index(str(channel))
        except ValueError:
            raise ModelError(f"unknown channel {channel!r}") from None

    def to_dict(self):
        return {"order": self.order, "coeffs": self.coeffs.tolist(),
                "noise_cov": self.noise_cov.tolist(), "names": list(self.names)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ModelError("model JSON must be an object")
        unknown = set(d) - {"order", "coeffs", "noise_cov", "names"}
        if unknown:
            raise ModelError(f"unknown model keys: {sorted(unknown)}")
        try:
            coeffs = np.asarray(d["coeffs"], dtype=np.float64)
            cov = np.asarray(d["noise_cov"], dtype=np.float64)
        except KeyError as exc:
            raise ModelError(f"model JSON lacks {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise ModelError("model arrays are malformed") from None
        if coeffs.ndim == 2:
            coeffs = coeffs[None]
        if "order" in d and d["order"] != coeffs.shape[0]:
            raise ModelError(f"order {d['order']} disagrees with {coeffs.shape[0]} coefficient matrices")
        return cls(coeffs, cov, d.get("names"))

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(f"model file is not valid JSON: {exc}") from None
        return cls.from_dict(d)


def companion(coeffs):
    p, m, _ = coeffs.shape
    f = np.zeros((p * m, p * m))
    f[:m] = np.hstack(list(coeffs))
    f[m:, :-m] = np.eye((p - 1) * m)
    return f


def spectral_radius(coeffs):
    return float(np.max(np.abs(np.linalg.eigvals(companion(np.asarray(coeffs))))))


def ring_model(a=0.5, b=0.5, c=0.5, noise_cov=None):
    """Three channels driven around a loop: z -> x -> y -> z, one-step lags."""
    coeffs = np.zeros((1, 3, 3))
    coeffs[0, 0, 2] = a
    coeffs[0, 1, 0] = b
    coeffs[0, 2, 1] = c
    return VarModel(coeffs, np.eye(3) if noise_cov is None else noise_cov, ("x", "y", "z"))


def white_source_model(b=1.0):
    """White x driving y one step later: ``y_t = b x_{t-1} + w_t``."""
    coeffs = np.zeros((1, 2, 2))
    coeffs[0, 1, 0] = b
    return VarModel(coeffs, np.eye(2), ("x", "y"))


def correlated_noise_model(rho=0.6):
    """Two white channels whose innovations have correlation ``rho``."""
    return VarModel(np.zeros((1, 2, 2)), [[1.0, rho], [rho, 1.0]], ("x", "y"))


def independent_model(m=3):
    return VarModel(np.zeros((1, m, m)), np.eye(m))


def _recursion_numpy(coeffs, noise, init):
    # same operation order as the compiled kernel, vectorized across channels
    p, m, _ = coeffs.shape
    n = noise.shape[0]
    out = np.empty((n + p, m))
    out[:p] = init
    for t in range(n):
        row = p + t
        acc = noise[t].copy()
        for j in range(p):
            prev = out[row - 1 - j]
            for c in range(m):
                acc += coeffs[j, :, c] * prev[c]
        out[row] = acc
    return out[p:]


def simulate_var(model, T, seed, burn_in=1000):
    """Seeded sample path of ``model``.

    Each channel draws standard normals from its own Philox stream spawned
    from ``seed``; innovations are those draws mixed by the Cholesky factor
    of the noise covariance. The recursion starts from zeros and the first
    ``burn_in`` samples are discarded.

    Returns
    -------
    TimeSeriesSet
        ``T`` samples named after the model channels.
    """
    if T < 1 or burn_in < 0:
        raise ValueError("need T >= 1 and burn_in >= 0")
    n = int(T) + int(burn_in)
    streams = np.random.SeedSequence(int(seed)).spawn(model.channel_count)
    white = np.column_stack([np.random.Generator(np.random.Philox(s)).standard_normal(n)
                             for s in streams])
    noise = white @ np.linalg.cholesky(model.noise_cov).T
    init = np.zeros((model.order, model.channel_count))
    coeffs = np.ascontiguousarray(model.coeffs)
    if _accel.USE_NUMBA:
        path = _var_recursion_numba(coeffs, np.ascontiguousarray(noise), init)
    else:
        path = _recursion_numpy(coeffs, noise, init)
    return TimeSeriesSet(path[burn_in:], model.names)


@dataclass(frozen=True)
class AutocovSequence:
    """``gammas[k] = E[X_t X_{t-k}^T]`` for ``k = 0..max_lag``."""

    gammas: np.ndarray

    @property
    def max_lag(self):
        return self.gammas.shape[0] - 1

    def __getitem__(self, k):
        if k < 0:
            return self.gammas[-k].T
        return self.gammas[k]

    def cross(self, lag_a, lag_b):
        """E[X_{t-lag_a} X_{t-lag_b}^T]."""
        return self[lag_b - lag_a]


def solve_lyapunov_fixed_point(f, q, tol=LYAPUNOV_TOL, max_iter=LYAPUNOV_MAX_ITER):
    """Iterate ``S <- F S F^T + Q`` to its fixed point."""
    s = q.copy()
    for _ in range(max_iter):
        nxt = f @ s @ f.T + q
        nxt = (nxt + nxt.T) / 2
        if np.max(np.abs(nxt - s)) <= tol * max(1.0, np.max(np.abs(nxt))):
            return nxt
        s = nxt
    raise OracleError(f"Lyapunov iteration did not converge in {max_iter} steps")


def stationary_autocov(model, max_lag):
    """Autocovariances ``Gamma(0..max_lag)`` of the stationary process."""
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    p, m = model.order, model.channel_count
    f = companion(model.coeffs)
    q = np.zeros((p * m, p * m))
    q[:m, :m] = model.noise_cov
    state = solve_lyapunov_fixed_point(f, q)
    gammas = np.empty((max(max_lag, p - 1) + 1, m, m))
    for k in range(p):
        gammas[k] = state[:m, k * m:(k + 1) * m]
    gammas[0] = (gammas[0] + gammas[0].T) / 2
    for k in range(p, max_lag + 1):
        gammas[k] = sum(model.coeffs[j] @ gammas[k - 1 - j] for j in range(p))
    return AutocovSequence(gammas[:max_lag + 1])


def _logdet(cov, idx):
    if len(idx) == 0:
        return 0.0
    block = cov[np.ix_(idx, idx)]
    try:
        chol = np.linalg.cholesky(block)
    except np.linalg.LinAlgError:
        raise OracleError("covariance block is singular or not positive definite") from None
    d = np.diag(chol)
    if np.min(d) <= 0:
        raise OracleError("covariance block is singular")
    return 2.0 * float(np.sum(np.log(d)))


def gaussian_cmi(cov, idx_x, idx_y, idx_z=()):
    """I(x; y | z) in nats for jointly Gaussian variables.

    ``0.5 * log(det S_xz det S_yz / (det S_z det S_xyz))`` from Cholesky
    log-determinants.

    Examples
    --------
    >>> round(gaussian_cmi(np.array([[1.0, 0.5], [0.5, 1.0]]), [0], [1]), 5)
    0.14384
    """
    cov = np.asarray(cov, dtype=np.float64)
    ix, iy, iz = (list(map(int, a)) for a in (idx_x, idx_y, idx_z))
    if set(ix) & set(iy) or set(ix) & set(iz) or set(iy) & set(iz):
        raise ValueError("index sets must be disjoint")
    if not ix or not iy:
        return 0.0
    v = 0.5 * (_logdet(cov, ix + iz) + _logdet(cov, iy + iz)
               - _logdet(cov, iz) - _logdet(cov, ix + iy + iz))
    if v < 0:
        if v < -CMI_NEG_TOL:
            raise OracleError(f"negative conditional MI {v:.3g}; covariance is inconsistent")
        v = 0.0
    return v


def _rate_layout(kind, src, tgt, cond, spec):
    """(channel, lag) labels of the x, y and z sets of one rate."""
    z = [(tgt, lag) for lag in range(1, spec.target_lag + 1)]
    cond_lags = ([0] if spec.cond_includes_present else []) + list(range(1, spec.cond_lag + 1))
    zc = [(ch, lag) for ch in cond for lag in cond_lags]
    src_past = [(src, lag) for lag in range(1, spec.source_lag + 1)]
    if kind == "TE":
        return src_past, [(tgt, 0)], z + zc
    if kind == "IIE":
        return [(src, 0)], [(tgt, 0)], src_past + z + zc
    raise ValueError(f"unknown rate kind {kind!r}")


def _rate(model, kind, src, tgt, cond, spec):
    xs, ys, zs = _rate_layout(kind, src, tgt, cond, spec)
    labels = xs + ys + zs
    max_lag = max(lag for _, lag in labels)
    if max_lag > MAX_ORACLE_LAG:
        raise OracleError(f"lag {max_lag} exceeds the oracle budget of {MAX_ORACLE_LAG}")
    acov = stationary_autocov(model, max_lag)
    n = len(labels)
    cov = np.empty((n, n))
    for a, (ca, la) in enumerate(labels):
        for b, (cb, lb) in enumerate(labels):
            cov[a, b] = acov.cross(la, lb)[ca, cb]
    nx, ny = len(xs), len(ys)
    return gaussian_cmi(cov, range(nx), range(nx, nx + ny), range(nx + ny, n))


def analytic_rate(model, kind, source, target, cond=(), spec=None):
    """Exact finite-lag rate of a stationary Gaussian VAR.

    Parameters
    ----------
    kind : {"TE", "IIE", "DI"}
        ``TE`` is I(x_{t-p..t-1}; y_t | y_{t-q..t-1}, Z), ``IIE`` is
        I(x_t; y_t | x past, y past, Z) and ``DI`` their sum, where Z holds
        the side channels at lags 1..r plus lag 0 when
        ``spec.cond_includes_present``.
    """
    spec = EmbeddingSpec() if spec is None else spec
    src, tgt = model.index(source), model.index(target)
    cond_idx = [model.index(c) for c in cond]
    if src == tgt or {src, tgt} & set(cond_idx) or len(set(cond_idx)) != len(cond_idx):
        raise ValueError("source, target and conditioning channels must be distinct")
    kind = kind.upper()
    if kind == "DI":
        te = _rate(model, "TE", src, tgt, cond_idx, spec)
        iie = _rate(model, "IIE", src, tgt, cond_idx, spec)
        return te + iie
    return _rate(model, kind, src, tgt, cond_idx, spec)


def true_graph(model, tol=1e-10):
    """Ground-truth mixed graph read off the coefficients and noise precision."""
    names = model.names
    m = model.channel_count
    strength = np.max(np.abs(model.coeffs), axis=0)
    precision = np.linalg.inv(model.noise_cov)
    directed = {(names[i], names[j]) for i in range(m) for j in range(m)
                if i != j and strength[j, i] > tol}
    undirected = {(names[i], names[j]) for i in range(m) for j in range(i + 1, m)
                  if abs(precision[i, j]) > tol}
    return CausalityGraph(names, directed, undirected)


def closed_form_white_source_te(b):
    """TE rate of :func:`white_source_model`: ``0.5 * log(1 + b^2)``."""
    return 0.5 * math.log1p(b * b)
