"""Pure-Python reference kernels.

Same signatures and results as the compiled ``_kernels`` extension. The graph
is passed in CSR form: the successors of symbol ``i`` are
``indices[indptr[i]:indptr[i + 1]]`` and edge ``e`` is the position in
``indices``.
"""

import numpy as np


def _cycle_walk(indptr, indices, base, n, visit):
    # Depth-first walk over paths base -> ... of n letters whose last letter
    # has an edge back to base.  ``visit(path, edges)`` fires once per cycle.
    path = [base] * n
    edges = [0] * n
    ptr = [0] * n
    ptr[0] = indptr[base]
    depth = 0
    while depth >= 0:
        node = path[depth]
        if depth == n - 1:
            # closing edge back to base
            for e in range(indptr[node], indptr[node + 1]):
                if indices[e] == base:
                    edges[depth] = e
                    visit(path, edges)
                    break
            depth -= 1
            continue
        e = ptr[depth]
        if e >= indptr[node + 1]:
            depth -= 1
            continue
        ptr[depth] = e + 1
        edges[depth] = e
        depth += 1
        nxt = int(indices[e])
        path[depth] = nxt
        ptr[depth] = indptr[nxt]


def count_cycles(indptr, indices, base, n):
    """Number of admissible n-cycles starting at ``base``."""
    total = [0]

    def visit(path, edges):
        total[0] += 1

    _cycle_walk(indptr, indices, int(base), int(n), visit)
    return total[0]


def enumerate_cycles(indptr, indices, base, n, limit):
    """All n-cycles through ``base`` as an int32 array of shape (count, n)."""
    rows = []

    def visit(path, edges):
        if len(rows) >= limit:
            raise OverflowError(f"more than {limit} cycles of length {n}")
        rows.append(list(path))

    _cycle_walk(indptr, indices, int(base), int(n), visit)
    if not rows:
        return np.zeros((0, n), dtype=np.int32)
    return np.asarray(rows, dtype=np.int32)


def cycle_translation_sums(indptr, indices, translations, matrix, n):
    """Accumulated lattice translations of every n-cycle, all base symbols.

    For a cycle with edges e_0..e_{n-1} returns
    ``sum_k matrix^(n-1-k) @ translations[e_k]`` (int64, shape (count, 2)).
    """
    m00, m01 = int(matrix[0][0]), int(matrix[0][1])
    m10, m11 = int(matrix[1][0]), int(matrix[1][1])
    out = []

    def visit(path, edges):
        x = y = 0
        for k in range(n):
            tx, ty = translations[edges[k]]
            x, y = m00 * x + m01 * y + int(tx), m10 * x + m11 * y + int(ty)
        out.append((x, y))

    n_symbols = len(indptr) - 1
    for base in range(n_symbols):
        _cycle_walk(indptr, indices, base, int(n), visit)
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(out, dtype=np.int64)
