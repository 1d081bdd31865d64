"""Independent reference computations used as test oracles.

Exact discrete quantities are evaluated outcome by outcome as expectations
of log-likelihood ratios of causally conditioned kernels, which is a
different route from the library's sums of conditional MIs.
"""
import itertools
import math

import numpy as np


def marginal(prob, axes):
    axes = sorted(axes)
    drop = tuple(a for a in range(prob.ndim) if a not in axes)
    return prob.sum(axis=drop) if drop else prob


def _p(prob, fixed):
    """P(axis a takes value fixed[a] for all a in fixed)."""
    if not fixed:
        return 1.0
    axes = sorted(fixed)
    return float(marginal(prob, axes)[tuple(fixed[a] for a in axes)])


def _cond(prob, outcome, target_axes, given_axes):
    joint = {a: outcome[a] for a in set(target_axes) | set(given_axes)}
    given = {a: outcome[a] for a in given_axes}
    return _p(prob, joint) / _p(prob, given)


def expect_log(prob, fn):
    """E[fn(outcome)] over outcomes with positive probability."""
    total = []
    for outcome in itertools.product(*(range(s) for s in prob.shape)):
        p = prob[outcome]
        if p > 0:
            total.append(p * fn(outcome))
    return math.fsum(total)


def causal_likelihood(prob, outcome, y, conds):
    """prod_i p(y_i | y_{1:i-1}, each cond process up to i) at ``outcome``."""
    logp = 0.0
    for i in range(len(y)):
        given = list(y[:i]) + [a for z in conds for a in z[:i + 1] if a is not None]
        logp += math.log(_cond(prob, outcome, [y[i]], given))
    return logp


def di_oracle(prob, x, y):
    """I(x -> y) = E log( p(y || x) / p(y) )."""
    return expect_log(prob, lambda o: causal_likelihood(prob, o, y, [x])
                      - math.log(_p(prob, {a: o[a] for a in y})))


def mi_oracle(prob, x, y):
    return expect_log(prob, lambda o: math.log(
        _p(prob, {a: o[a] for a in x + y})
        / (_p(prob, {a: o[a] for a in x}) * _p(prob, {a: o[a] for a in y}))))


def causal_entropy_oracle(prob, y, conds):
    return -expect_log(prob, lambda o: causal_likelihood(prob, o, y, conds))


def entropy_oracle(prob, axes):
    return -expect_log(prob, lambda o: math.log(_p(prob, {a: o[a] for a in axes})))


def gaussian_mi(rho):
    return -0.5 * math.log1p(-rho * rho)


def ar1_gamma0(a, s2=1.0):
    return s2 / (1 - a * a)


def brute_ksg_counts(x, y, k):
    """KSG algorithm 1 neighbor counts by explicit double loops."""
    n = len(x)
    nx = np.zeros(n, dtype=int)
    ny = np.zeros(n, dtype=int)
    for i in range(n):
        d = [max(np.max(np.abs(x[i] - x[j])), np.max(np.abs(y[i] - y[j])))
             for j in range(n) if j != i]
        eps = sorted(d)[k - 1]
        nx[i] = sum(1 for j in range(n) if j != i and np.max(np.abs(x[i] - x[j])) < eps)
        ny[i] = sum(1 for j in range(n) if j != i and np.max(np.abs(y[i] - y[j])) < eps)
    return nx, ny
