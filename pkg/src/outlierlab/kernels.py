"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over. Setting ``OUTLIERLAB_PURE=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("OUTLIERLAB_PURE", "") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def _csr_parts(mat):
    indptr = np.ascontiguousarray(mat.indptr, dtype=np.int64)
    indices = np.ascontiguousarray(mat.indices, dtype=np.int32)
    data = np.ascontiguousarray(mat.data, dtype=np.float64)
    return indptr, indices, data


def matvec(mat, x, impl=None):
    """``mat @ x`` for a scipy CSR matrix with deterministic summation order."""
    impl = impl or _impl
    indptr, indices, data = _csr_parts(mat)
    return impl.csr_matvec(indptr, indices, data, np.ascontiguousarray(x, dtype=np.float64))


def make_operator(mat, impl=None):
    """Return ``x -> mat @ x`` with the CSR arrays converted once up front."""
    impl = impl or _impl
    indptr, indices, data = _csr_parts(mat)

    def apply(x):
        return impl.csr_matvec(indptr, indices, data, np.ascontiguousarray(x, dtype=np.float64))

    return apply


def row_norms_sq(mat, impl=None):
    """Squared Euclidean norm of every row of a CSR matrix."""
    impl = impl or _impl
    indptr, _, data = _csr_parts(mat)
    return impl.csr_row_norms_sq(indptr, data)


def closed_walks(adj, length, impl=None):
    """Enumerate closed walks of the given length on the graph of ``adj``.

    ``adj`` is a scipy sparse matrix whose nonzero pattern defines the graph.
    Returns an int32 array of shape ``(count, length + 1)``.
    """
    from scipy.sparse.csgraph import shortest_path

    impl = impl or _impl
    csr = adj.tocsr()
    csr.sort_indices()
    n = csr.shape[0]
    pattern = csr.copy()
    pattern.data = np.ones_like(pattern.data, dtype=np.float64)
    d = shortest_path(pattern, unweighted=True, directed=False)
    big = length + 1
    dist = np.where(np.isfinite(d), d, big).astype(np.int32)
    dist = np.ascontiguousarray(np.minimum(dist, big))
    indptr = np.ascontiguousarray(csr.indptr, dtype=np.int64)
    indices = np.ascontiguousarray(csr.indices, dtype=np.int32)
    if n == 0:
        return np.zeros((0, length + 1), dtype=np.int32)
    return impl.closed_walks(indptr, indices, dist, int(length))
