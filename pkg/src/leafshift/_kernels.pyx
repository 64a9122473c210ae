# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cycle-enumeration kernels (see ``_kernels_py`` for the reference)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int32_t INT32
ctypedef cnp.int64_t INT64


cdef Py_ssize_t _closing_edge(const INT32[:] indptr, const INT32[:] indices,
                              Py_ssize_t node, Py_ssize_t base) nogil:
    cdef Py_ssize_t e
    for e in range(indptr[node], indptr[node + 1]):
        if indices[e] == base:
            return e
    return -1


def count_cycles(indptr, indices, base, n):
    cdef const INT32[:] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const INT32[:] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef Py_ssize_t nn = n, b = base, depth = 0, node, e
    cdef INT64 total = 0
    cdef Py_ssize_t[:] path = np.empty(nn, dtype=np.intp)
    cdef Py_ssize_t[:] ptr = np.empty(nn, dtype=np.intp)
    path[0] = b
    ptr[0] = ip[b]
    with nogil:
        while depth >= 0:
            node = path[depth]
            if depth == nn - 1:
                if _closing_edge(ip, ix, node, b) >= 0:
                    total += 1
                depth -= 1
                continue
            e = ptr[depth]
            if e >= ip[node + 1]:
                depth -= 1
                continue
            ptr[depth] = e + 1
            depth += 1
            path[depth] = ix[e]
            ptr[depth] = ip[ix[e]]
    return int(total)


def enumerate_cycles(indptr, indices, base, n, limit):
    cdef const INT32[:] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const INT32[:] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef Py_ssize_t nn = n, b = base, depth = 0, node, e, k
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t cap = max(64, min(limit, 1 << 16))
    out = np.empty((cap, nn), dtype=np.int32)
    cdef INT32[:, :] rows = out
    cdef Py_ssize_t[:] path = np.empty(nn, dtype=np.intp)
    cdef Py_ssize_t[:] ptr = np.empty(nn, dtype=np.intp)
    path[0] = b
    ptr[0] = ip[b]
    while depth >= 0:
        node = path[depth]
        if depth == nn - 1:
            if _closing_edge(ip, ix, node, b) >= 0:
                if count >= limit:
                    raise OverflowError(f"more than {limit} cycles of length {n}")
                if count == cap:
                    cap = min(2 * cap, max(limit, cap + 1))
                    out = np.resize(out, (cap, nn))
                    rows = out
                for k in range(nn):
                    rows[count, k] = <INT32> path[k]
                count += 1
            depth -= 1
            continue
        e = ptr[depth]
        if e >= ip[node + 1]:
            depth -= 1
            continue
        ptr[depth] = e + 1
        depth += 1
        path[depth] = ix[e]
        ptr[depth] = ip[ix[e]]
    return out[:count].copy()


def cycle_translation_sums(indptr, indices, translations, matrix, n):
    cdef const INT32[:] ip = np.ascontiguousarray(indptr, dtype=np.int32)
    cdef const INT32[:] ix = np.ascontiguousarray(indices, dtype=np.int32)
    cdef const INT64[:, :] tr = np.ascontiguousarray(translations, dtype=np.int64)
    cdef INT64 m00 = matrix[0][0], m01 = matrix[0][1]
    cdef INT64 m10 = matrix[1][0], m11 = matrix[1][1]
    cdef Py_ssize_t nn = n, n_sym = len(indptr) - 1
    cdef Py_ssize_t b, depth, node, e, k, closing
    cdef INT64 x, y, tx
    cdef Py_ssize_t count = 0, cap = 1024
    out = np.empty((cap, 2), dtype=np.int64)
    cdef INT64[:, :] res = out
    cdef Py_ssize_t[:] path = np.empty(nn, dtype=np.intp)
    cdef Py_ssize_t[:] edges = np.empty(nn, dtype=np.intp)
    cdef Py_ssize_t[:] ptr = np.empty(nn, dtype=np.intp)
    for b in range(n_sym):
        depth = 0
        path[0] = b
        ptr[0] = ip[b]
        while depth >= 0:
            node = path[depth]
            if depth == nn - 1:
                closing = _closing_edge(ip, ix, node, b)
                if closing >= 0:
                    edges[depth] = closing
                    x = 0
                    y = 0
                    for k in range(nn):
                        tx = m00 * x + m01 * y + tr[edges[k], 0]
                        y = m10 * x + m11 * y + tr[edges[k], 1]
                        x = tx
                    if count == cap:
                        cap *= 2
                        out = np.resize(out, (cap, 2))
                        res = out
                    res[count, 0] = x
                    res[count, 1] = y
                    count += 1
                depth -= 1
                continue
            e = ptr[depth]
            if e >= ip[node + 1]:
                depth -= 1
                continue
            ptr[depth] = e + 1
            edges[depth] = e
            depth += 1
            path[depth] = ix[e]
            ptr[depth] = ip[ix[e]]
    return out[:count].copy()
