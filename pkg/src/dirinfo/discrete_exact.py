"""Exact finite-horizon information quantities by full enumeration.

A joint law over ``x_{1:t}`` and ``y_{1:t}`` is held as a tensor with one
axis per time sample: axes ``0..t-1`` are ``x_1..x_t`` and axes
``t..2t-1`` are ``y_1..y_t``. Every quantity is a sum of conditional
mutual informations between sets of axes, each evaluated from marginal
entropies.

A *process* below is a list of per-time axis indices. ``None`` stands for a
constant sample; the delay operator shifts a process by one step and puts
``None`` in front, which is the zero-symbol padding of the delayed vector.
Conditioning on a constant changes nothing, so ``None`` entries are simply
dropped from axis sets.
"""
import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

MAX_OUTCOME_BITS = 24
SUM_TOL = 1e-12


class PmfError(ValueError):
    """Invalid joint probability table."""


@dataclass(frozen=True)
class JointPmf:
    """Joint law of two finite-alphabet processes over ``t`` steps.

    Parameters
    ----------
    t : int
        Horizon.
    ax, ay : int
        Alphabet sizes of x and y.
    prob : array_like
        ``ax**t * ay**t`` probabilities, row-major over
        ``(x_1, ..., x_t, y_1, ..., y_t)``; any shape with that many entries.
    """

    t: int
    ax: int
    ay: int
    prob: np.ndarray

    def __post_init__(self):
        t, ax, ay = self.t, self.ax, self.ay
        if t < 1 or ax < 1 or ay < 1:
            raise PmfError("horizon and alphabet sizes must be >= 1")
        if t * (math.log2(ax) + math.log2(ay)) > MAX_OUTCOME_BITS:
            raise PmfError(f"more than 2^{MAX_OUTCOME_BITS} joint outcomes")
        shape = (ax,) * t + (ay,) * t
        prob = np.asarray(self.prob, dtype=np.float64)
        if prob.size != math.prod(shape):
            raise PmfError(f"expected {math.prod(shape)} probabilities, got {prob.size}")
        prob = prob.reshape(shape).copy()
        if not np.all(np.isfinite(prob)) or np.any(prob < 0):
            raise PmfError("probabilities must be finite and non-negative")
        if abs(math.fsum(prob.ravel()) - 1.0) > SUM_TOL:
            raise PmfError("probabilities do not sum to 1")
        prob.setflags(write=False)
        object.__setattr__(self, "prob", prob)

    @property
    def x(self):
        return list(range(self.t))

    @property
    def y(self):
        return list(range(self.t, 2 * self.t))

    def swapped(self):
        """The same law with the roles of x and y exchanged."""
        t = self.t
        order = list(range(t, 2 * t)) + list(range(t))
        return JointPmf(t, self.ay, self.ax, np.transpose(self.prob, order))

    def to_json(self):
        return json.dumps({"t": self.t, "ax": self.ax, "ay": self.ay,
                           "probs": [float(p) for p in self.prob.ravel()]})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(int(d["t"]), int(d["ax"]), int(d["ay"]), np.asarray(d["probs"]))


def delay(process):
    """Shift a process one step into the past, padding with a constant."""
    return [None] + list(process[:-1])


def _axes(*groups):
    out = set()
    for g in groups:
        out.update(a for a in g if a is not None)
    return frozenset(out)


def entropy(prob, axes):
    """Joint entropy in nats of the marginal on ``axes``; 0 log 0 = 0."""
    axes = _axes(axes)
    if not axes:
        return 0.0
    drop = tuple(a for a in range(prob.ndim) if a not in axes)
    marg = prob.sum(axis=drop) if drop else prob
    q = marg[marg > 0]
    return -math.fsum((q * np.log(q)).tolist())


def cond_entropy(prob, a, c=()):
    """H(a | c)."""
    return entropy(prob, _axes(a, c)) - entropy(prob, _axes(c))


def cmi(prob, a, b, c=()):
    """I(a; b | c) over axis sets, clamped at zero against rounding."""
    a, b, c = _axes(a), _axes(b), _axes(c)
    a, b = a - c, b - c
    if not a or not b:
        return 0.0
    v = (entropy(prob, a | c) + entropy(prob, b | c)
         - entropy(prob, a | b | c) - entropy(prob, c))
    return max(v, 0.0)


def _prefix(process, i):
    return process[:i + 1]


def _past_of(conds, i):
    return [a for z in conds for a in _prefix(z, i)]


def causal_conditional_di(prob, x, y, conds=()):
    """I(x -> y || z_1, ..., z_k) = sum_i I(x_{1:i}; y_i | y_{1:i-1}, z_{1:i})."""
    total = []
    for i in range(len(y)):
        total.append(cmi(prob, _prefix(x, i), [y[i]],
                         list(y[:i]) + _past_of(conds, i)))
    return math.fsum(total)


def causal_entropy(prob, y, conds=()):
    """H(y || z_1, ..., z_k) = sum_i H(y_i | y_{1:i-1}, z_{1:i})."""
    return math.fsum(cond_entropy(prob, [y[i]], list(y[:i]) + _past_of(conds, i))
                     for i in range(len(y)))


def joint_causal_entropy(prob, processes, conds=()):
    """H(y, x || z) with the pair advancing together in time."""
    t = len(processes[0])
    terms = []
    for i in range(t):
        now = [p[i] for p in processes]
        past = [a for p in processes for a in p[:i]]
        terms.append(cond_entropy(prob, now, past + _past_of(conds, i)))
    return math.fsum(terms)


def classical_then_causal_entropy(prob, y, x, z):
    """H(y | x || z), expanded as H(y, x || z) - H(x || z)."""
    return joint_causal_entropy(prob, [y, x], [z]) - causal_entropy(prob, x, [z])


def causal_then_classical_entropy(prob, y, x, z):
    """H(y || x | z) = sum_i H(y_i | y_{1:i-1}, x_{1:i}, z_{1:t})."""
    return math.fsum(cond_entropy(prob, [y[i]], list(y[:i]) + list(x[:i + 1]) + list(z))
                     for i in range(len(y)))


def _roles(pmf, direction):
    if direction in ("x->y", "x→y"):
        return pmf.x, pmf.y
    if direction in ("y->x", "y→x"):
        return pmf.y, pmf.x
    raise ValueError(f"direction must be 'x->y' or 'y->x', got {direction!r}")


def mutual_information_exact(pmf):
    """I(x_{1:t}; y_{1:t}) in nats."""
    return cmi(pmf.prob, pmf.x, pmf.y)


def directed_information_exact(pmf, direction="x->y"):
    """I(x_{1:t} -> y_{1:t}) = sum_i I(x_{1:i}; y_i | y_{1:i-1}).

    Examples
    --------
    >>> p = np.zeros((2, 2, 2, 2)); p[0, 0, 0, 0] = p[0, 1, 0, 1] = 0.25
    >>> p[1, 0, 1, 0] = p[1, 1, 1, 1] = 0.25
    >>> round(directed_information_exact(JointPmf(2, 2, 2, p)) / math.log(2), 12)
    2.0
    """
    src, tgt = _roles(pmf, direction)
    return causal_conditional_di(pmf.prob, src, tgt)


def delayed_directed_information_exact(pmf, direction="x->y"):
    """I(D src -> tgt), the flow carried by strictly past source samples."""
    src, tgt = _roles(pmf, direction)
    return causal_conditional_di(pmf.prob, delay(src), tgt)


def instantaneous_exchange_exact(pmf):
    """I(x -> y || Dx) = sum_i I(x_i; y_i | x_{1:i-1}, y_{1:i-1}); symmetric."""
    return causal_conditional_di(pmf.prob, pmf.x, pmf.y, [delay(pmf.x)])


def causal_cond_entropy_exact(pmf, direction="x->y"):
    """H(tgt || src) = sum_i H(tgt_i | tgt_{1:i-1}, src_{1:i})."""
    src, tgt = _roles(pmf, direction)
    return causal_entropy(pmf.prob, tgt, [src])


def binary_entropy(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log(p) - (1 - p) * math.log(1 - p)


def _from_kernels(t, ax, ay, x_kernel, y_kernel):
    """Joint tensor from sequential kernels p(x_i | past) and p(y_i | past, x_i)."""
    prob = np.zeros((ax,) * t + (ay,) * t)
    for xs in itertools.product(range(ax), repeat=t):
        for ys in itertools.product(range(ay), repeat=t):
            p = 1.0
            for i in range(t):
                p *= x_kernel(i, xs[:i], ys[:i])[xs[i]]
                p *= y_kernel(i, xs[:i + 1], ys[:i])[ys[i]]
            prob[xs + ys] = p
    return prob / prob.sum()


def random_pmf(t, rng, ax=2, ay=2, alpha=0.5, zero_prob=0.1):
    """Dirichlet-random joint law, with some outcomes zeroed out."""
    shape = (ax,) * t + (ay,) * t
    w = rng.dirichlet(np.full(math.prod(shape), alpha))
    w[rng.random(w.size) < zero_prob] = 0.0
    if w.sum() == 0:
        w[rng.integers(w.size)] = 1.0
    return JointPmf(t, ax, ay, w / w.sum())


def feedback_free_pmf(t, rng, ax=2, ay=2, alpha=1.0):
    """Random law where each ``x_i`` ignores ``y_{1:i-1}`` given ``x_{1:i-1}``."""
    x_tables, y_tables = {}, {}

    def x_kernel(i, xp, yp):
        key = (i, xp)
        if key not in x_tables:
            x_tables[key] = rng.dirichlet(np.full(ax, alpha))
        return x_tables[key]

    def y_kernel(i, xp, yp):
        key = (i, xp, yp)
        if key not in y_tables:
            y_tables[key] = rng.dirichlet(np.full(ay, alpha))
        return y_tables[key]

    return JointPmf(t, ax, ay, _from_kernels(t, ax, ay, x_kernel, y_kernel))


def channel_pmf(t, flip, px=None):
    """i.i.d. binary input through a memoryless binary symmetric channel."""
    px = np.array([0.5, 0.5]) if px is None else np.asarray(px, dtype=float)
    table = np.array([[1 - flip, flip], [flip, 1 - flip]])
    return JointPmf(t, 2, 2, _from_kernels(
        t, 2, 2, lambda i, xp, yp: px, lambda i, xp, yp: table[xp[-1]]))


def product_pmf(px, py):
    """Independent x and y with joint tensors ``px`` and ``py``."""
    px, py = np.asarray(px, dtype=float), np.asarray(py, dtype=float)
    t = px.ndim
    return JointPmf(t, px.shape[0], py.shape[0], np.multiply.outer(px, py))
