"""Pure-Python fallback for the compiled kernels.

Same signatures and the same accumulation order as ``_kernels.pyx``, so the
two backends agree bit for bit.
"""

import numpy as np


def csr_matvec(indptr, indices, data, x):
    n = len(indptr) - 1
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc = acc + float(data[k]) * float(x[indices[k]])
        out[i] = acc
    return out


def csr_row_norms_sq(indptr, data):
    n = len(indptr) - 1
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            d = float(data[k])
            acc = acc + d * d
        out[i] = acc
    return out


def closed_walks(indptr, indices, dist, length):
    """All closed walks of ``length`` steps, one row per walk, sorted by start."""
    n = len(indptr) - 1
    nbrs = [list(indices[indptr[v]:indptr[v + 1]]) for v in range(n)]
    rows = []
    for start in range(n):
        stack = [start]
        iters = [iter(nbrs[start])]
        while iters:
            depth = len(stack) - 1
            if depth == length:
                if stack[-1] == start:
                    rows.append(list(stack))
                stack.pop()
                iters.pop()
                continue
            w = next(iters[-1], None)
            if w is None:
                stack.pop()
                iters.pop()
                continue
            if dist[start, w] <= length - depth - 1:
                stack.append(int(w))
                iters.append(iter(nbrs[w]))
    if not rows:
        return np.zeros((0, length + 1), dtype=np.int32)
    return np.asarray(rows, dtype=np.int32)
