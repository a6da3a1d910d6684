# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernel. Bit-compatible with ``_pytree``."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, qsort
from libc.math cimport INFINITY

cnp.import_array()

ctypedef unsigned long long u64


cdef struct Pair:
    double x
    int y


cdef struct Frame:
    Py_ssize_t node
    Py_ssize_t start
    Py_ssize_t end
    int depth


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef double xa = (<Pair*>a).x
    cdef double xb = (<Pair*>b).x
    return (xa > xb) - (xa < xb)


cdef inline u64 _next(u64* state) noexcept nogil:
    cdef u64 z
    state[0] = state[0] + <u64>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _uniform(u64* state) noexcept nogil:
    return <double>(_next(state) >> 11) * (1.0 / 9007199254740992.0)


cdef Py_ssize_t _grow(
    const double[:, ::1] X,
    const signed char[::1] y,
    Py_ssize_t* idx,
    Py_ssize_t m_root,
    int max_features,
    int max_depth,
    bint extra,
    u64 state,
    double[::1] importances,
    Py_ssize_t[::1] feature,
    double[::1] threshold,
    Py_ssize_t[::1] left,
    Py_ssize_t[::1] right,
    double[::1] value,
    Pair* buf,
    Py_ssize_t* feats,
    Frame* stack,
) noexcept nogil:
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t n_nodes = 1
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t nid, start, end, m, i, j, k, f, tmp, best_f, lo_i, hi_i
    cdef int depth
    cdef long p_int
    cdef double p, q, parent_imp, best_child, best_thr, child, thr
    cdef double nl, pl, ql, nr, pr, qr, lo, hi, xv
    cdef Frame fr

    for i in range(d):
        feats[i] = i
    feature[0] = -1
    left[0] = -1
    right[0] = -1
    threshold[0] = 0.0
    stack[0].node = 0
    stack[0].start = 0
    stack[0].end = m_root
    stack[0].depth = 0
    top = 1
    while top > 0:
        top -= 1
        fr = stack[top]
        nid = fr.node
        start = fr.start
        end = fr.end
        depth = fr.depth
        m = end - start
        p_int = 0
        for i in range(start, end):
            p_int += y[idx[i]]
        value[nid] = <double>p_int / <double>m
        if depth >= max_depth or m < 2 or p_int == 0 or p_int == m:
            continue
        p = <double>p_int
        q = <double>m - p
        parent_imp = <double>m - (p * p + q * q) / <double>m
        best_child = INFINITY
        best_f = -1
        best_thr = 0.0
        for k in range(max_features):
            j = k + <Py_ssize_t>(_next(&state) % <u64>(d - k))
            tmp = feats[k]
            feats[k] = feats[j]
            feats[j] = tmp
            f = feats[k]
            if extra:
                lo = X[idx[start], f]
                hi = lo
                for i in range(start + 1, end):
                    xv = X[idx[i], f]
                    if xv < lo:
                        lo = xv
                    if xv > hi:
                        hi = xv
                if lo == hi:
                    continue
                thr = lo + _uniform(&state) * (hi - lo)
                if thr >= hi:
                    thr = lo
                nl = 0.0
                pl = 0.0
                for i in range(start, end):
                    if X[idx[i], f] <= thr:
                        nl += 1.0
                        pl += y[idx[i]]
                ql = nl - pl
                nr = <double>m - nl
                pr = p - pl
                qr = nr - pr
                child = (nl - (pl * pl + ql * ql) / nl) + (nr - (pr * pr + qr * qr) / nr)
                if child < best_child:
                    best_child = child
                    best_f = f
                    best_thr = thr
            else:
                for i in range(m):
                    buf[i].x = X[idx[start + i], f]
                    buf[i].y = y[idx[start + i]]
                qsort(buf, m, sizeof(Pair), _cmp_pair)
                pl = 0.0
                for i in range(m - 1):
                    pl += buf[i].y
                    if buf[i].x < buf[i + 1].x:
                        nl = <double>(i + 1)
                        ql = nl - pl
                        nr = <double>m - nl
                        pr = p - pl
                        qr = nr - pr
                        child = (nl - (pl * pl + ql * ql) / nl) + (nr - (pr * pr + qr * qr) / nr)
                        if child < best_child:
                            best_child = child
                            best_f = f
                            thr = (buf[i].x + buf[i + 1].x) / 2.0
                            if thr >= buf[i + 1].x:
                                thr = buf[i].x
                            best_thr = thr
        if best_f < 0:
            continue
        importances[best_f] += parent_imp - best_child
        # in-place partition: rows with x <= thr first
        lo_i = start
        hi_i = end - 1
        while lo_i <= hi_i:
            if X[idx[lo_i], best_f] <= best_thr:
                lo_i += 1
            else:
                tmp = idx[lo_i]
                idx[lo_i] = idx[hi_i]
                idx[hi_i] = tmp
                hi_i -= 1
        feature[nid] = best_f
        threshold[nid] = best_thr
        left[nid] = n_nodes
        right[nid] = n_nodes + 1
        for i in range(n_nodes, n_nodes + 2):
            feature[i] = -1
            left[i] = -1
            right[i] = -1
            threshold[i] = 0.0
            value[i] = 0.0
        stack[top].node = n_nodes + 1
        stack[top].start = lo_i
        stack[top].end = end
        stack[top].depth = depth + 1
        top += 1
        stack[top].node = n_nodes
        stack[top].start = start
        stack[top].end = lo_i
        stack[top].depth = depth + 1
        top += 1
        n_nodes += 2
    return n_nodes


def grow_tree(
    const double[:, ::1] X,
    const signed char[::1] y,
    sample_idx,
    int max_features,
    int max_depth,
    bint extra,
    rng_state,
    double[::1] importances,
):
    """Grow one tree; same contract as ``_pytree.grow_tree``."""
    cdef Py_ssize_t[::1] idx_view = np.array(sample_idx, dtype=np.intp, copy=True)
    cdef Py_ssize_t m = idx_view.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t cap = 2 * m + 1
    cdef u64 state = <u64>(int(rng_state) & 0xFFFFFFFFFFFFFFFF)
    if m < 1:
        raise ValueError("empty sample")
    if not 1 <= max_features <= d:
        raise ValueError("max_features out of range")
    feature = np.empty(cap, dtype=np.intp)
    threshold = np.empty(cap, dtype=np.float64)
    left = np.empty(cap, dtype=np.intp)
    right = np.empty(cap, dtype=np.intp)
    value = np.empty(cap, dtype=np.float64)
    cdef Py_ssize_t[::1] fv = feature
    cdef double[::1] tv = threshold
    cdef Py_ssize_t[::1] lv = left
    cdef Py_ssize_t[::1] rv = right
    cdef double[::1] vv = value
    cdef Pair* buf = <Pair*>malloc(m * sizeof(Pair))
    cdef Py_ssize_t* feats = <Py_ssize_t*>malloc(d * sizeof(Py_ssize_t))
    cdef Frame* stack = <Frame*>malloc(cap * sizeof(Frame))
    cdef Py_ssize_t n_nodes
    if buf == NULL or feats == NULL or stack == NULL:
        free(buf)
        free(feats)
        free(stack)
        raise MemoryError()
    try:
        with nogil:
            n_nodes = _grow(
                X, y, &idx_view[0], m, max_features, max_depth, extra, state,
                importances, fv, tv, lv, rv, vv, buf, feats, stack,
            )
    finally:
        free(buf)
        free(feats)
        free(stack)
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
    )


def apply_tree(
    const double[:, ::1] X,
    const Py_ssize_t[::1] feature,
    const double[::1] threshold,
    const Py_ssize_t[::1] left,
    const Py_ssize_t[::1] right,
    const double[::1] value,
):
    """Leaf value reached by every row of ``X``."""
    cdef Py_ssize_t n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t r, node
    with nogil:
        for r in range(n):
            node = 0
            while left[node] >= 0:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            ov[r] = value[node]
    return out
