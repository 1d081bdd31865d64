"""Numba kernels: max-norm kd-tree queries and the VAR recursion.

Every query point is itself a member of the indexed cloud; results exclude
the query point by position, so exact duplicates still count as neighbors
of each other. Loops over query points are split into a few chunks per
thread so scratch buffers are allocated once per chunk.
"""
import numpy as np
from numba import get_num_threads, njit, prange

LEAF_SIZE = 32
_STACK = 128


def n_chunks_for(n):
    """Work chunks for a parallel loop over ``n`` query points."""
    return max(1, min(n, 4 * get_num_threads()))


@njit(cache=True)
def build_tree(points, leaf_size):
    """Build a kd-tree with tight bounding boxes.

    Returns ``(data, perm, start, end, left, right, lo, hi)`` where ``data``
    is ``points[perm]`` stored contiguously in tree order.
    """
    n, d = points.shape
    half = max(1, (leaf_size + 1) // 2)
    max_nodes = 2 * (n // half + 1) + 1
    perm = np.arange(n)
    start = np.empty(max_nodes, np.int64)
    end = np.empty(max_nodes, np.int64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    lo = np.empty((max_nodes, d))
    hi = np.empty((max_nodes, d))

    start[0] = 0
    end[0] = n
    n_nodes = 1
    stack = np.empty(_STACK, np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s = start[node]
        e = end[node]
        for c in range(d):
            lo[node, c] = np.inf
            hi[node, c] = -np.inf
        for j in range(s, e):
            p = perm[j]
            for c in range(d):
                v = points[p, c]
                if v < lo[node, c]:
                    lo[node, c] = v
                if v > hi[node, c]:
                    hi[node, c] = v
        if e - s <= leaf_size:
            continue
        dim = 0
        spread = -1.0
        for c in range(d):
            w = hi[node, c] - lo[node, c]
            if w > spread:
                spread = w
                dim = c
        if spread <= 0.0:
            continue
        seg = perm[s:e].copy()
        keys = np.empty(e - s)
        for j in range(e - s):
            keys[j] = points[seg[j], dim]
        order = np.argsort(keys, kind="mergesort")
        for j in range(e - s):
            perm[s + j] = seg[order[j]]
        mid = s + (e - s) // 2
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        start[lc] = s
        end[lc] = mid
        start[rc] = mid
        end[rc] = e
        left[node] = lc
        right[node] = rc
        stack[sp] = lc
        stack[sp + 1] = rc
        sp += 2

    data = np.empty((n, d))
    for j in range(n):
        for c in range(d):
            data[j, c] = points[perm[j], c]
    return (data, perm, start[:n_nodes].copy(), end[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(),
            lo[:n_nodes].copy(), hi[:n_nodes].copy())


@njit(cache=True, inline="always")
def _box_min(q, lo, hi, node):
    m = 0.0
    for c in range(q.shape[0]):
        v = lo[node, c] - q[c]
        w = q[c] - hi[node, c]
        if w > v:
            v = w
        if v > m:
            m = v
    return m


@njit(cache=True, inline="always")
def _box_max(q, lo, hi, node):
    m = 0.0
    for c in range(q.shape[0]):
        v = q[c] - lo[node, c]
        w = hi[node, c] - q[c]
        if w > v:
            v = w
        if v > m:
            m = v
    return m


@njit(cache=True, inline="always")
def _maxabs_below(a, i, b, j, bound):
    m = 0.0
    for c in range(a.shape[1]):
        v = abs(a[i, c] - b[j, c])
        if v > m:
            m = v
            if m >= bound:
                break
    return m


@njit(cache=True, inline="always")
def _maxabs(a, i, j):
    m = 0.0
    for c in range(a.shape[1]):
        v = abs(a[i, c] - a[j, c])
        if v > m:
            m = v
    return m


@njit(cache=True, inline="always")
def _insert(best, dist):
    p = best.shape[0] - 1
    while p > 0 and best[p - 1] > dist:
        best[p] = best[p - 1]
        p -= 1
    best[p] = dist


@njit(cache=True, inline="always")
def _push_children(q, lo, hi, left, right, node, bound, stack, sdist, sp):
    # far child first so the near one is popped next
    lc = left[node]
    rc = right[node]
    dl = _box_min(q, lo, hi, lc)
    dr = _box_min(q, lo, hi, rc)
    if dl > dr:
        lc, rc = rc, lc
        dl, dr = dr, dl
    if dr < bound:
        stack[sp] = rc
        sdist[sp] = dr
        sp += 1
    if dl < bound:
        stack[sp] = lc
        sdist[sp] = dl
        sp += 1
    return sp


@njit(cache=True)
def _knn_one(data, start, end, left, right, lo, hi, pos, best, stack, sdist):
    k = best.shape[0]
    q = data[pos]
    for i in range(k):
        best[i] = np.inf
    stack[0] = 0
    sdist[0] = 0.0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if sdist[sp] >= best[k - 1]:
            continue
        if left[node] < 0:
            for j in range(start[node], end[node]):
                if j == pos:
                    continue
                dist = _maxabs_below(data, j, data, pos, best[k - 1])
                if dist < best[k - 1]:
                    _insert(best, dist)
        else:
            sp = _push_children(q, lo, hi, left, right, node, best[k - 1],
                                stack, sdist, sp)
    return best[k - 1]


@njit(cache=True, parallel=True)
def tree_knn_radius(points, k, n_chunks, leaf_size=LEAF_SIZE):
    """Distance from each point to its k-th nearest other point."""
    data, perm, start, end, left, right, lo, hi = build_tree(points, leaf_size)
    n = points.shape[0]
    out = np.empty(n)
    for ch in prange(n_chunks):
        best = np.empty(k)
        stack = np.empty(_STACK, np.int64)
        sdist = np.empty(_STACK)
        for pos in range(ch * n // n_chunks, (ch + 1) * n // n_chunks):
            out[perm[pos]] = _knn_one(data, start, end, left, right, lo, hi,
                                      pos, best, stack, sdist)
    return out


@njit(cache=True)
def _count_one(data, start, end, left, right, lo, hi, pos, r, stack):
    if r <= 0.0:
        return 0
    q = data[pos]
    d = data.shape[1]
    count = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _box_min(q, lo, hi, node) >= r:
            continue
        if _box_max(q, lo, hi, node) < r:
            count += end[node] - start[node]
            continue
        if left[node] < 0:
            for j in range(start[node], end[node]):
                inside = True
                for c in range(d):
                    if abs(data[j, c] - q[c]) >= r:
                        inside = False
                        break
                if inside:
                    count += 1
        else:
            stack[sp] = right[node]
            stack[sp + 1] = left[node]
            sp += 2
    # the query point itself sits at distance 0 < r
    return count - 1


@njit(cache=True, parallel=True)
def tree_range_count(points, radii, n_chunks, leaf_size=LEAF_SIZE):
    """Number of other points strictly closer than ``radii[i]`` to point i."""
    data, perm, start, end, left, right, lo, hi = build_tree(points, leaf_size)
    n = points.shape[0]
    out = np.empty(n, np.int64)
    for ch in prange(n_chunks):
        stack = np.empty(_STACK, np.int64)
        for pos in range(ch * n // n_chunks, (ch + 1) * n // n_chunks):
            i = perm[pos]
            out[i] = _count_one(data, start, end, left, right, lo, hi, pos,
                                radii[i], stack)
    return out


@njit(cache=True)
def _select_kth(w, size, kth):
    """Value of rank ``kth`` (0-based) among ``w[:size]``; reorders ``w``."""
    lo = 0
    hi = size - 1
    while hi > lo:
        mid = (lo + hi) >> 1
        a = w[lo]
        b = w[mid]
        c = w[hi]
        if a > b:
            a, b = b, a
        if b > c:
            b, c = c, b
        if a > b:
            a, b = b, a
        piv = b
        i = lo
        j = hi
        while i <= j:
            while w[i] < piv:
                i += 1
            while w[j] > piv:
                j -= 1
            if i <= j:
                w[i], w[j] = w[j], w[i]
                i += 1
                j -= 1
        if kth <= j:
            hi = j
        elif kth >= i:
            lo = i
        else:
            return w[kth]
    return w[kth]


@njit(cache=True)
def _cosort(d, idx, size):
    """Sort ``d[:size]`` ascending in place, carrying ``idx`` along."""
    stack = np.empty(2 * 64, np.int64)
    sp = 0
    lo = 0
    hi = size - 1
    while True:
        if hi - lo < 16:
            for a in range(lo + 1, hi + 1):
                v = d[a]
                w = idx[a]
                b = a - 1
                while b >= lo and d[b] > v:
                    d[b + 1] = d[b]
                    idx[b + 1] = idx[b]
                    b -= 1
                d[b + 1] = v
                idx[b + 1] = w
            if sp == 0:
                return
            sp -= 2
            lo = stack[sp]
            hi = stack[sp + 1]
            continue
        mid = (lo + hi) >> 1
        a = d[lo]
        b = d[mid]
        c = d[hi]
        if a > b:
            a, b = b, a
        if b > c:
            b, c = c, b
        if a > b:
            a, b = b, a
        piv = b
        i = lo
        j = hi
        while i <= j:
            while d[i] < piv:
                i += 1
            while d[j] > piv:
                j -= 1
            if i <= j:
                d[i], d[j] = d[j], d[i]
                idx[i], idx[j] = idx[j], idx[i]
                i += 1
                j -= 1
        # recurse into the smaller side first to bound the stack
        if j - lo < hi - i:
            stack[sp] = i
            stack[sp + 1] = hi
            hi = j
        else:
            stack[sp] = lo
            stack[sp + 1] = j
            lo = i
        sp += 2


@njit(cache=True, inline="always")
def _dist_to_all(cols, i, out):
    # column-major layout keeps the inner loops contiguous
    n = cols.shape[1]
    q = cols[0, i]
    for j in range(n):
        out[j] = abs(cols[0, j] - q)
    for c in range(1, cols.shape[0]):
        q = cols[c, i]
        for j in range(n):
            v = abs(cols[c, j] - q)
            if v > out[j]:
                out[j] = v


@njit(cache=True, parallel=True)
def select_knn_lists(cols, m, n_chunks):
    """Indices and distances of the m nearest other points, ascending.

    ``cols`` is the cloud transposed to ``(d, n)``. Every distance is
    computed; a threshold estimated on a strided sample narrows the set that
    goes through exact selection. Ties at the m-th distance are resolved by
    lower index.
    """
    n = cols.shape[1]
    out_i = np.empty((n, m), np.int64)
    out_d = np.empty((n, m))
    stride = 16 if n >= 16 * m else 1
    for ch in prange(n_chunks):
        dist = np.empty(n)
        work = np.empty(n)
        sel_i = np.empty(n, np.int64)
        sel_d = np.empty(n)
        buf_i = np.empty(m, np.int64)
        buf_d = np.empty(m)
        for i in range(ch * n // n_chunks, (ch + 1) * n // n_chunks):
            _dist_to_all(cols, i, dist)
            dist[i] = np.inf
            theta = np.inf
            if stride > 1:
                ns = 0
                for j in range(0, n, stride):
                    work[ns] = dist[j]
                    ns += 1
                theta = _select_kth(work, ns, min(ns - 1, (3 * m) // (2 * stride)))
            cnt = 0
            for j in range(n):
                if j != i and dist[j] <= theta:
                    sel_i[cnt] = j
                    sel_d[cnt] = dist[j]
                    cnt += 1
            if cnt < m:
                # the sampled threshold was too tight: keep everything
                cnt = 0
                for j in range(n):
                    if j != i:
                        sel_i[cnt] = j
                        sel_d[cnt] = dist[j]
                        cnt += 1
            for c in range(cnt):
                work[c] = sel_d[c]
            th = _select_kth(work, cnt, m - 1)
            got = 0
            for c in range(cnt):
                if sel_d[c] < th:
                    buf_i[got] = sel_i[c]
                    buf_d[got] = sel_d[c]
                    got += 1
            for c in range(cnt):
                if got == m:
                    break
                if sel_d[c] == th:
                    buf_i[got] = sel_i[c]
                    buf_d[got] = th
                    got += 1
            _cosort(buf_d, buf_i, m)
            for c in range(m):
                out_i[i, c] = buf_i[c]
                out_d[i, c] = buf_d[c]
    return out_i, out_d


@njit(cache=True, inline="always")
def _split_dist(w, i, j, dx, dxy):
    """Max-abs distances of rows i and j over the x, y and rest slices of ``w``."""
    vx = 0.0
    for c in range(dx):
        v = abs(w[i, c] - w[j, c])
        if v > vx:
            vx = v
    vy = 0.0
    for c in range(dx, dxy):
        v = abs(w[i, c] - w[j, c])
        if v > vy:
            vy = v
    vz = 0.0
    for c in range(dxy, w.shape[1]):
        v = abs(w[i, c] - w[j, c])
        if v > vz:
            vz = v
    return vx, vy, vz


@njit(cache=True)
def _cmi_counts_row(i, fcols, w, dx, dxy, cand_i, cand_d, best, cx, cy, cz,
                    dfb, bx, by, bz):
    m = cand_i.shape[1]
    k = best.shape[0]
    for p in range(k):
        best[p] = np.inf
    scanned = 0
    for c in range(m):
        df = cand_d[i, c]
        if df >= best[k - 1]:
            break
        vx, vy, vz = _split_dist(w, i, cand_i[i, c], dx, dxy)
        if df > vz:
            vz = df
        cx[c] = vx
        cy[c] = vy
        cz[c] = vz
        scanned += 1
        dist = max(vz, vx, vy)
        if dist < best[k - 1]:
            _insert(best, dist)
    e = best[k - 1]
    extended = cand_d[i, m - 1] < e
    if extended:
        # the list ran out before certifying the radius; the listed points
        # still bound it from above, so redo the row over every point
        # closer than that bound in the fixed block
        bound = e
        for p in range(k):
            best[p] = np.inf
        _dist_to_all(fcols, i, dfb)
        dfb[i] = np.inf
        scanned = 0
        for j in range(dfb.shape[0]):
            df = dfb[j]
            if df >= bound:
                continue
            vx, vy, vz = _split_dist(w, i, j, dx, dxy)
            if df > vz:
                vz = df
            bx[scanned] = vx
            by[scanned] = vy
            bz[scanned] = vz
            scanned += 1
            dist = max(vz, vx, vy)
            if dist < best[k - 1]:
                _insert(best, dist)
        e = best[k - 1]
        cx, cy, cz = bx, by, bz
    nxz = 0
    nyz = 0
    nz = 0
    for c in range(scanned):
        if cz[c] < e:
            nz += 1
            if cx[c] < e:
                nxz += 1
            if cy[c] < e:
                nyz += 1
    return e, nxz, nyz, nz, extended


@njit(cache=True, parallel=True)
def candidate_cmi_counts(fcols, w, dx, dy, cand_i, cand_d, k, n_chunks):
    """k-NN radius and the three conditional counts from fixed-block lists.

    The conditioning block is the fixed block (given transposed as
    ``fcols``) plus the columns of ``w`` after its leading ``dx`` x and
    ``dy`` y columns. ``cand_i``/``cand_d`` are the ascending neighbor
    lists of the fixed block. Rows whose list is too short are redone by a
    full scan over every point inside the list's radius bound. Returns
    ``(eps, n_xz, n_yz, n_z, n_extended)``.
    """
    n = w.shape[0]
    m = cand_i.shape[1]
    dxy = dx + dy
    eps = np.empty(n)
    nxz = np.empty(n, np.int64)
    nyz = np.empty(n, np.int64)
    nz = np.empty(n, np.int64)
    extended = np.zeros(n, np.int64)
    for ch in prange(n_chunks):
        best = np.empty(k)
        cx = np.empty(m)
        cy = np.empty(m)
        cz = np.empty(m)
        dfb = np.empty(n)
        bx = np.empty(n)
        by = np.empty(n)
        bz = np.empty(n)
        for i in range(ch * n // n_chunks, (ch + 1) * n // n_chunks):
            e, a, b, c, ext = _cmi_counts_row(i, fcols, w, dx, dxy, cand_i, cand_d, best,
                                              cx, cy, cz, dfb, bx, by, bz)
            eps[i] = e
            nxz[i] = a
            nyz[i] = b
            nz[i] = c
            if ext:
                extended[i] = 1
    return eps, nxz, nyz, nz, extended.sum()


@njit(cache=True)
def var_recursion(coeffs, noise, init):
    """Run ``X_t = sum_j A_j X_{t-j} + e_t`` over the rows of ``noise``.

    ``init`` holds the ``p`` most recent pre-sample states, oldest first.
    """
    p, m, _ = coeffs.shape
    n = noise.shape[0]
    out = np.empty((n + p, m))
    out[:p] = init
    for t in range(n):
        row = p + t
        for i in range(m):
            acc = noise[t, i]
            for j in range(p):
                prev = row - 1 - j
                for c in range(m):
                    acc += coeffs[j, i, c] * out[prev, c]
            out[row, i] = acc
    return out[p:]
