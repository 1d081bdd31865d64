"""Multivariate recordings, CSV ingestion, standardization and lag embedding."""
import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed or unusable input data."""


@dataclass(frozen=True)
class TimeSeriesSet:
    """A T x M real-valued recording; rows are time samples, columns channels."""

    values: np.ndarray
    names: tuple

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError("values must be a non-empty T x M matrix")
        names = tuple(str(n) for n in self.names)
        if len(names) != values.shape[1]:
            raise DataError(f"{len(names)} names for {values.shape[1]} channels")
        if len(set(names)) != len(names):
            raise DataError(f"channel names are not unique: {list(names)}")
        bad = np.argwhere(~np.isfinite(values))
        if len(bad):
            t, c = bad[0]
            raise DataError(f"non-finite value at row {t + 1}, channel {names[c]!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_array(cls, values, names=None):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if names is None:
            names = default_names(values.shape[1])
        return cls(values, tuple(names))

    @property
    def sample_count(self):
        return self.values.shape[0]

    @property
    def channel_count(self):
        return self.values.shape[1]

    def index(self, channel):
        """Column index of a channel given by name or integer position."""
        if isinstance(channel, (int, np.integer)) and not isinstance(channel, bool):
            if not 0 <= channel < self.channel_count:
                raise DataError(f"channel index {channel} out of range")
            return int(channel)
        try:
            return self.names.index(str(channel))
        except ValueError:
            raise DataError(f"unknown channel {channel!r}") from None

    def column(self, channel):
        return self.values[:, self.index(channel)]

    def trim(self, burn_in):
        """Drop the first ``burn_in`` samples."""
        if not 0 <= burn_in < self.sample_count:
            raise DataError(f"cannot trim {burn_in} of {self.sample_count} samples")
        return TimeSeriesSet(self.values[burn_in:], self.names)

    def with_column(self, channel, column):
        values = np.array(self.values)
        values[:, self.index(channel)] = column
        return TimeSeriesSet(values, self.names)

    def to_csv(self, path):
        """Write with a header row; floats use their shortest round-trip form."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.names)
            for row in self.values:
                writer.writerow([repr(float(v)) for v in row])


def default_names(m):
    return tuple(f"x{i + 1}" for i in range(m))


def load_csv(path, has_header=True):
    """Read a comma-separated recording, one row per time step.

    Raises
    ------
    DataError
        Missing file, empty data, ragged rows or unparseable fields; the
        message names the 1-based data row and column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if not rows:
        raise DataError(f"{path}: empty data")
    names = None
    if has_header:
        names = [h.strip() for h in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path}: empty data")
    width = len(names) if names is not None else len(rows[0])
    data = np.empty((len(rows), width))
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(f"{path}: row {r} has {len(row)} fields, expected {width}")
        for c, field_ in enumerate(row, start=1):
            try:
                v = float(field_)
            except ValueError:
                raise DataError(
                    f"{path}: row {r}, column {c}: cannot parse {field_.strip()!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: row {r}, column {c}: missing or non-finite value")
            data[r - 1, c - 1] = v
    return TimeSeriesSet(data, tuple(names) if names else default_names(width))


def standardize(ts):
    """Center each channel and scale it to unit (n-1) standard deviation."""
    if ts.sample_count < 2:
        raise DataError("standardization needs at least two samples")
    values = ts.values
    mean = values.mean(axis=0)
    centered = values - mean
    std = np.sqrt((centered ** 2).sum(axis=0) / (ts.sample_count - 1))
    for name, s, col in zip(ts.names, std, values.T):
        if s == 0 or np.all(col == col[0]):
            raise DataError(f"channel {name!r} is constant")
    return TimeSeriesSet(centered / std, ts.names)


@dataclass(frozen=True)
class EmbeddingSpec:
    """Finite lags standing in for the infinite pasts of each role."""

    target_lag: int = 3
    source_lag: int = 3
    cond_lag: int = 3
    cond_includes_present: bool = True
    source_includes_present: bool = False

    def __post_init__(self):
        for name in ("target_lag", "source_lag", "cond_lag"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise DataError(f"{name} must be an integer >= 1, got {v!r}")

    @classmethod
    def uniform(cls, lag, **kwargs):
        return cls(target_lag=lag, source_lag=lag, cond_lag=lag, **kwargs)

    def max_lag(self, has_cond=True):
        lags = [self.target_lag, self.source_lag]
        if has_cond:
            lags.append(self.cond_lag)
        return max(lags)

    def to_dict(self):
        return {
            "target_lag": int(self.target_lag),
            "source_lag": int(self.source_lag),
            "cond_lag": int(self.cond_lag),
            "cond_includes_present": bool(self.cond_includes_present),
            "source_includes_present": bool(self.source_includes_present),
        }


@dataclass(frozen=True)
class EmbeddedCloud:
    """Row-aligned blocks of lagged samples.

    Row ``i`` of every block is taken at time ``times[i]``; ``labels`` maps
    each block to its ``(channel index, lag)`` column labels.
    """

    blocks: dict
    labels: dict
    times: np.ndarray = field(repr=False)

    @property
    def n(self):
        return len(self.times)

    def __getitem__(self, name):
        return self.blocks[name]


def lag_matrix(series, lags, start):
    """Columns ``series[t - lag]`` for ``t = start, ..., len(series) - 1``.

    >>> lag_matrix([0.0, 1.0, 2.0, 3.0], [1, 2], 2).tolist()
    [[1.0, 0.0], [2.0, 1.0]]
    """
    series = np.asarray(series)
    n = len(series) - start
    out = np.empty((n, len(lags)))
    for c, lag in enumerate(lags):
        out[:, c] = series[start - lag:start - lag + n]
    return out


def embed(ts, spec, source, target, cond=()):
    """Lag-embed one (source, target) pair with optional side channels.

    Blocks: ``target_now`` (y_t), ``target_past`` (y_{t-1..t-q}),
    ``source_past`` (x_{t-1..t-p}), ``source_now`` (x_t, only when
    ``spec.source_includes_present``) and ``cond_block`` (for each side
    channel: its present sample when ``spec.cond_includes_present``, then
    lags 1..r). ``cond_block`` is present, possibly with zero columns, even
    without side channels.
    """
    src = ts.index(source)
    tgt = ts.index(target)
    cond_idx = [ts.index(c) for c in cond]
    if src == tgt:
        raise DataError("source and target must differ")
    if len(set(cond_idx)) != len(cond_idx) or {src, tgt} & set(cond_idx):
        raise DataError("conditioning channels must be distinct from source and target")
    start = spec.max_lag(has_cond=bool(cond_idx))
    if ts.sample_count - start < 1:
        raise DataError(
            f"{ts.sample_count} samples are too few for lag {start}")
    v = ts.values
    blocks = {}
    labels = {}

    def put(name, ch, lags):
        blocks[name] = lag_matrix(v[:, ch], lags, start)
        labels[name] = [(ch, lag) for lag in lags]

    put("target_now", tgt, [0])
    put("target_past", tgt, list(range(1, spec.target_lag + 1)))
    put("source_past", src, list(range(1, spec.source_lag + 1)))
    if spec.source_includes_present:
        put("source_now", src, [0])
    cond_lags = ([0] if spec.cond_includes_present else []) + list(range(1, spec.cond_lag + 1))
    cols = [lag_matrix(v[:, ch], cond_lags, start) for ch in cond_idx]
    blocks["cond_block"] = (np.hstack(cols) if cols
                            else np.empty((ts.sample_count - start, 0)))
    labels["cond_block"] = [(ch, lag) for ch in cond_idx for lag in cond_lags]
    times = np.arange(start, ts.sample_count)
    return EmbeddedCloud(blocks, labels, times)
