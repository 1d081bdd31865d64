"""Surrogate tests for every edge and assembly of the causality graph.

A directed edge i -> j is tested with the TE rate from i to j, and an
undirected edge i -- j with the instantaneous exchange rate, each given all
remaining channels. The null distribution comes from circular shifts of the
source channel; p-values use the rank formula and are corrected for
multiple testing separately within the directed and the undirected family.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimatorConfig
from .graph import DIRECTED, UNDIRECTED, CausalityGraph, EdgeTestResult
from .measures import ShiftStatistic, fixed_block, perturb
from .neighbors import FixedBlockIndex
from .timeseries import DataError, EmbeddingSpec, TimeSeriesSet, standardize

_KIND_CODE = {DIRECTED: 0, UNDIRECTED: 1}
CORRECTIONS = ("bh", "bonferroni")


@dataclass(frozen=True)
class InferenceConfig:
    """Settings of a graph inference run.

    ``alpha`` is the level of each Bonferroni-corrected family, or the false
    discovery rate target under Benjamini-Hochberg. ``list_size`` is the
    neighbor list length of the reused conditioning index; it changes
    speed only, never results.
    """

    spec: EmbeddingSpec = field(default_factory=EmbeddingSpec)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    n_surrogates: int = 99
    alpha: float = 0.05
    correction: str = "bh"
    seed: int = 0
    min_shift: float = 0.1
    standardize: bool = True
    list_size: int = 512

    def __post_init__(self):
        if isinstance(self.n_surrogates, bool) or not isinstance(self.n_surrogates, int) \
                or self.n_surrogates < 19:
            raise ValueError("n_surrogates must be an integer >= 19")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"correction must be one of {CORRECTIONS}")
        if not 0 < self.min_shift < 0.5:
            raise ValueError(f"min_shift must lie in (0, 0.5), got {self.min_shift}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if not isinstance(self.list_size, int) or self.list_size < 1:
            raise ValueError("list_size must be a positive integer")

    def to_dict(self):
        return {
            "spec": self.spec.to_dict(),
            "estimator": self.estimator.to_dict(),
            "n_surrogates": self.n_surrogates,
            "alpha": self.alpha,
            "correction": self.correction,
            "seed": self.seed,
            "min_shift": self.min_shift,
            "standardize": self.standardize,
        }


def shift_band(T, min_shift):
    """Smallest and largest admissible circular shift for ``T`` samples."""
    return math.ceil(min_shift * T), math.floor((1 - min_shift) * T)


def circular_shift_surrogate(ts, channel, shift, min_shift=0.1):
    """Copy of ``ts`` with one channel rotated forward by ``shift`` samples.

    Examples
    --------
    >>> ts = TimeSeriesSet.from_array([[1.0], [2.0], [3.0], [4.0]])
    >>> circular_shift_surrogate(ts, 0, 2).values[:, 0].tolist()
    [3.0, 4.0, 1.0, 2.0]
    """
    lo, hi = shift_band(ts.sample_count, min_shift)
    if not lo <= shift <= hi or shift <= 0:
        raise ValueError(f"shift {shift} outside the admissible band [{lo}, {hi}]")
    return ts.with_column(channel, np.roll(ts.column(channel), shift))


def edge_seed(master, kind, i, j):
    """Seed sequence of one edge test, derived from the master seed."""
    return np.random.SeedSequence(master, spawn_key=(_KIND_CODE[kind], i, j))


def draw_shifts(T, n, min_shift, seed_seq):
    """``n`` distinct shifts from the admissible band."""
    lo, hi = shift_band(T, min_shift)
    band = hi - lo + 1
    if band < n or lo < 1:
        raise DataError(f"{T} samples leave {max(band, 0)} admissible shifts, "
                        f"fewer than the {n} surrogates requested")
    rng = np.random.Generator(np.random.Philox(seed_seq))
    return lo + rng.choice(band, size=n, replace=False)


def rank_pvalue(observed, null):
    """(1 + #{null >= observed}) / (1 + len(null))."""
    null = np.asarray(null)
    return (1 + int(np.count_nonzero(null >= observed))) / (1 + len(null))


def bh_adjust(pvalues, q):
    """Benjamini-Hochberg step-up rejections at false discovery rate ``q``.

    Examples
    --------
    >>> bh_adjust([0.001, 0.02, 0.04, 0.2], 0.05).tolist()
    [True, True, False, False]
    """
    p = np.asarray(pvalues, dtype=np.float64)
    m = len(p)
    reject = np.zeros(m, dtype=bool)
    if m == 0:
        return reject
    order = np.argsort(p, kind="stable")
    below = np.flatnonzero(p[order] <= q * np.arange(1, m + 1) / m)
    if below.size:
        reject[order[:below[-1] + 1]] = True
    return reject


def bonferroni(pvalues, alpha):
    p = np.asarray(pvalues, dtype=np.float64)
    return p <= alpha / max(len(p), 1)


def adjust(pvalues, cfg):
    if cfg.correction == "bh":
        return bh_adjust(pvalues, cfg.alpha)
    return bonferroni(pvalues, cfg.alpha)


def prepare(ts, cfg):
    """Standardize (if configured) and add the estimator's tie-breaking noise."""
    return perturb(standardize(ts) if cfg.standardize else ts, cfg.estimator)


def _remaining(ts, i, j):
    return tuple(ts.names[c] for c in range(ts.channel_count) if c not in (i, j))


def _run_test(noisy, kind, i, j, cond, cfg, index=None):
    source, target = noisy.names[i], noisy.names[j]
    stat_kind = "TE" if kind == DIRECTED else "IIE"
    stat = ShiftStatistic(noisy, stat_kind, source, target, cond, cfg.spec,
                          cfg.estimator, index=index, list_size=cfg.list_size)
    shifts = draw_shifts(noisy.sample_count, cfg.n_surrogates, cfg.min_shift,
                         edge_seed(cfg.seed, kind, i, j))
    observed = stat.value(0)
    null = np.array([stat.value(int(s)) for s in shifts])
    result = EdgeTestResult(kind, (source, target), observed, null,
                            rank_pvalue(observed, null))
    return result, stat.index


def edge_pvalue(ts, kind, pair, cond=None, cfg=None):
    """Surrogate test of one edge.

    Parameters
    ----------
    kind : {"directed", "undirected"}
    pair : (source, target)
        For undirected tests the first channel is the one shifted.
    cond : channels, optional
        Defaults to every channel outside ``pair``.

    Returns
    -------
    EdgeTestResult
        ``reject`` is the uncorrected decision ``p <= cfg.alpha``.
    """
    cfg = InferenceConfig() if cfg is None else cfg
    if kind not in _KIND_CODE:
        raise ValueError(f"kind must be 'directed' or 'undirected', got {kind!r}")
    i, j = ts.index(pair[0]), ts.index(pair[1])
    if i == j:
        raise DataError("pair channels must differ")
    cond = _remaining(ts, i, j) if cond is None else tuple(ts.names[ts.index(c)] for c in cond)
    result, _ = _run_test(prepare(ts, cfg), kind, i, j, cond, cfg)
    return EdgeTestResult(result.kind, result.pair, result.statistic, result.null,
                          result.p_value, result.p_value <= cfg.alpha)


def infer_graph(ts, cfg=None, progress=None):
    """Test every directed and undirected edge and keep the significant ones.

    Ordered pairs are visited in channel order; the undirected test of
    ``(i, j)`` with ``i < j`` shifts channel ``i`` and reuses the
    conditioning lists of the directed test ``i -> j``.

    Parameters
    ----------
    ts : TimeSeriesSet
        At least two channels.
    cfg : InferenceConfig, optional
    progress : callable, optional
        Called with each raw :class:`EdgeTestResult` as it completes.
    """
    cfg = InferenceConfig() if cfg is None else cfg
    m = ts.channel_count
    if m < 2:
        raise DataError("graph inference needs at least two channels")
    noisy = prepare(ts, cfg)
    raw = {DIRECTED: [], UNDIRECTED: []}
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            cond = _remaining(noisy, i, j)
            index = FixedBlockIndex(
                fixed_block(noisy, noisy.names[i], noisy.names[j], cond, cfg.spec),
                m=cfg.list_size, method=cfg.estimator.method)
            kinds = (DIRECTED, UNDIRECTED) if i < j else (DIRECTED,)
            for kind in kinds:
                result, _ = _run_test(noisy, kind, i, j, cond, cfg, index)
                raw[kind].append(result)
                if progress is not None:
                    progress(result)
            del index
    graph = CausalityGraph(ts.names)
    for kind, results in raw.items():
        flags = adjust([r.p_value for r in results], cfg)
        for r, flag in zip(results, flags):
            r = EdgeTestResult(r.kind, r.pair, r.statistic, r.null, r.p_value, bool(flag))
            graph.results[(kind, r.pair)] = r
            if flag:
                (graph.directed if kind == DIRECTED else graph.undirected).add(r.pair)
    return graph
