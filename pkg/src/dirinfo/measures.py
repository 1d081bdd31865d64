"""Transfer entropy, instantaneous exchange and directed information rates.

Each rate is a single conditional MI on a lag embedding of the recording:

* TE:  I(x_{t-p..t-1}; y_t | y_{t-q..t-1}, Z)
* IIE: I(x_t; y_t | x_{t-p..t-1}, y_{t-q..t-1}, Z)
* DI:  TE + IIE

where Z holds the side channels at lags 1..r, plus their present samples
when ``spec.cond_includes_present``. Tie-breaking noise is added to the
recording itself before embedding, so the TE and IIE clouds of one call
see the same perturbed samples and exchanging x and y in IIE only permutes
columns.
"""
from dataclasses import dataclass, replace

import numpy as np

from .estimators import (EstimationError, EstimatorConfig, check_distinct,
                         cmi_from_counts, fp_cmi_raw, jitter_series)
from .neighbors import FixedBlockIndex
from .timeseries import EmbeddingSpec, TimeSeriesSet, embed, lag_matrix

KINDS = ("TE", "IIE", "DI")


@dataclass(frozen=True)
class MeasureEstimate:
    """One estimated rate in nats, with everything needed to reproduce it."""

    kind: str
    value: float
    source: str
    target: str
    cond: tuple
    spec: EmbeddingSpec
    estimator: EstimatorConfig
    n_effective: int
    te: float = None
    iie: float = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "source": self.source,
            "target": self.target,
            "cond": list(self.cond),
            "value_nats": self.value,
            "te_nats": self.te,
            "iie_nats": self.iie,
            "spec": self.spec.to_dict(),
            "estimator": self.estimator.to_dict(),
            "n_effective": self.n_effective,
        }


def perturb(ts, est):
    """The recording with the estimator's tie-breaking noise added."""
    return TimeSeriesSet(jitter_series(ts.values, est.jitter_scale, est.seed), ts.names)


def te_spec(spec):
    return replace(spec, source_includes_present=False)


def iie_spec(spec):
    return replace(spec, source_includes_present=True)


def rate_clouds(ts, kind, source, target, cond, spec):
    """The (X, Y, Z) clouds of one rate, plus the effective sample count."""
    if kind == "TE":
        cloud = embed(ts, te_spec(spec), source, target, cond)
        z = np.hstack([cloud["target_past"], cloud["cond_block"]])
        return cloud["source_past"], cloud["target_now"], z, cloud.n
    if kind == "IIE":
        cloud = embed(ts, iie_spec(spec), source, target, cond)
        z = np.hstack([cloud["source_past"], cloud["target_past"], cloud["cond_block"]])
        return cloud["source_now"], cloud["target_now"], z, cloud.n
    raise ValueError(f"unknown rate kind {kind!r}")


def _defaults(spec, est):
    return (EmbeddingSpec() if spec is None else spec,
            EstimatorConfig() if est is None else est)


def _rate_value(noisy, kind, source, target, cond, spec, est):
    x, y, z, n = rate_clouds(noisy, kind, source, target, cond, spec)
    return fp_cmi_raw(x, y, z, est.k, est.method), n


def _estimate(ts, kind, source, target, cond, spec, est):
    spec, est = _defaults(spec, est)
    cond = tuple(ts.names[ts.index(c)] for c in cond)
    source, target = ts.names[ts.index(source)], ts.names[ts.index(target)]
    noisy = perturb(ts, est)
    te = iie = None
    if kind in ("TE", "DI"):
        te, n = _rate_value(noisy, "TE", source, target, cond, spec, est)
    if kind in ("IIE", "DI"):
        iie, n = _rate_value(noisy, "IIE", source, target, cond, spec, est)
    value = {"TE": te, "IIE": iie}.get(kind)
    if kind == "DI":
        value = te + iie
    return MeasureEstimate(kind, value, source, target, cond, spec, est, n, te, iie)


def transfer_entropy_rate(ts, source, target, cond=(), spec=None, est=None):
    """Estimated TE rate from ``source`` to ``target`` given ``cond``."""
    return _estimate(ts, "TE", source, target, cond, spec, est)


def instantaneous_exchange_rate(ts, source, target, cond=(), spec=None, est=None):
    """Estimated instantaneous exchange rate; symmetric in source and target."""
    return _estimate(ts, "IIE", source, target, cond, spec, est)


def directed_info_rate(ts, source, target, cond=(), spec=None, est=None):
    """Estimated DI rate, defined as the TE estimate plus the IIE estimate."""
    return _estimate(ts, "DI", source, target, cond, spec, est)


def estimate_rate(ts, kind, source, target, cond=(), spec=None, est=None):
    kind = kind.upper()
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return _estimate(ts, kind, source, target, cond, spec, est)


def fixed_block(noisy, source, target, cond, spec):
    """Conditioning columns untouched by source shifts: target past and Z."""
    cloud = embed(noisy, te_spec(spec), source, target, cond)
    return np.hstack([cloud["target_past"], cloud["cond_block"]])


class ShiftStatistic:
    """A TE or IIE statistic re-evaluated under circular shifts of the source.

    Only the source blocks change from one shift to the next, so the
    neighbor lists of the remaining conditioning columns are computed once
    (or taken from ``index``) and reused.

    Parameters
    ----------
    noisy : TimeSeriesSet
        Recording that already carries the tie-breaking noise.
    kind : {"TE", "IIE"}
    index : FixedBlockIndex, optional
        Lists built from :func:`fixed_block` for the same target, cond and
        spec; the source does not enter the fixed block.
    """

    def __init__(self, noisy, kind, source, target, cond, spec, est, index=None,
                 list_size=512):
        if kind not in ("TE", "IIE"):
            raise ValueError(f"shift statistic supports TE and IIE, not {kind!r}")
        self.kind = kind
        self.spec = spec
        self.est = est
        self.source_series = noisy.column(source)
        x, y, z, n = rate_clouds(noisy, kind, source, target, cond, spec)
        self.n = n
        self.start = noisy.sample_count - n
        self.y = y
        self.fixed = fixed_block(noisy, source, target, cond, spec)
        if index is None:
            index = FixedBlockIndex(self.fixed, m=list_size, method=est.method)
        elif index.n != n:
            raise ValueError("index does not match the embedding")
        self.index = index
        # distinct fixed rows make every joint row distinct, whatever the shift
        try:
            check_distinct(self.fixed)
            self._fixed_distinct = True
        except EstimationError:
            self._fixed_distinct = False

    def _source_blocks(self, series):
        past = lag_matrix(series, range(1, self.spec.source_lag + 1), self.start)
        if self.kind == "TE":
            return past, np.empty((self.n, 0))
        return lag_matrix(series, [0], self.start), past

    def value(self, shift=0):
        """Statistic with the source rotated forward by ``shift`` samples."""
        series = np.roll(self.source_series, shift) if shift else self.source_series
        x, zrest = self._source_blocks(series)
        if not self._fixed_distinct:
            check_distinct(np.hstack([x, self.y, self.fixed, zrest]))
        _, nxz, nyz, nz = self.index.cmi_counts(x, self.y, zrest, self.est.k)
        return cmi_from_counts(self.est.k, nxz, nyz, nz)
