"""Hot numeric kernels for training: CSR matrix-vector products, the
stable sigmoid, and the logistic-loss sum.

Two interchangeable backends: numba ``@njit`` loops (default when numba
imports) and a pure-numpy path. Select explicitly with the environment
variable ``AGGDETECT_KERNELS=numpy|numba`` or at runtime via
:func:`set_backend`. ``benchmarks/bench_kernels.py`` compares the two.

Both backends are deterministic run-to-run; they may differ from each
other in the last float bits because summation order differs.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

BACKEND_ENV = "AGGDETECT_KERNELS"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the numpy backend
    HAS_NUMBA = False


def csr_matvec_numpy(indptr, indices, data, w):
    """Row sums of X*w for CSR X: empty rows handled via the cumsum trick."""
    products = data * w[indices]
    csum = np.concatenate(([0.0], np.cumsum(products)))
    return csum[indptr[1:]] - csum[indptr[:-1]]


def csr_rmatvec_numpy(indptr, indices, data, r, n_features):
    """X^T * r for CSR X."""
    row_nnz = np.diff(indptr)
    expanded = np.repeat(r, row_nnz)
    return np.bincount(indices, weights=data * expanded, minlength=n_features)


def sigmoid_numpy(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_sum_numpy(z, y):
    """Sum over examples of max(z,0) - y*z + log1p(exp(-|z|))."""
    return float(np.sum(np.maximum(z, 0.0) - y * z + np.log1p(np.exp(-np.abs(z)))))


def _csr_matvec_loop(indptr, indices, data, w):
    m = indptr.shape[0] - 1
    out = np.zeros(m)
    for row in range(m):
        acc = 0.0
        for j in range(indptr[row], indptr[row + 1]):
            acc += data[j] * w[indices[j]]
        out[row] = acc
    return out


def _csr_rmatvec_loop(indptr, indices, data, r, n_features):
    m = indptr.shape[0] - 1
    out = np.zeros(n_features)
    for row in range(m):
        ri = r[row]
        for j in range(indptr[row], indptr[row + 1]):
            out[indices[j]] += data[j] * ri
    return out


def _sigmoid_loop(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        if z[i] >= 0.0:
            out[i] = 1.0 / (1.0 + np.exp(-z[i]))
        else:
            e = np.exp(z[i])
            out[i] = e / (1.0 + e)
    return out


def _logistic_loss_sum_loop(z, y):
    acc = 0.0
    for i in range(z.shape[0]):
        zi = z[i]
        acc += max(zi, 0.0) - y[i] * zi + np.log1p(np.exp(-abs(zi)))
    return acc


if HAS_NUMBA:
    csr_matvec_numba = njit(cache=True)(_csr_matvec_loop)
    csr_rmatvec_numba = njit(cache=True)(_csr_rmatvec_loop)
    sigmoid_numba = njit(cache=True)(_sigmoid_loop)
    logistic_loss_sum_numba = njit(cache=True)(_logistic_loss_sum_loop)

_BACKENDS = {
    "numpy": (csr_matvec_numpy, csr_rmatvec_numpy, sigmoid_numpy, logistic_loss_sum_numpy),
}
if HAS_NUMBA:
    _BACKENDS["numba"] = (
        csr_matvec_numba,
        csr_rmatvec_numba,
        sigmoid_numba,
        logistic_loss_sum_numba,
    )

_active = "numpy"
csr_matvec = csr_matvec_numpy
csr_rmatvec = csr_rmatvec_numpy
sigmoid = sigmoid_numpy
logistic_loss_sum = logistic_loss_sum_numpy


def set_backend(name: str) -> str:
    """Select the kernel backend; returns the backend actually in effect."""
    global _active, csr_matvec, csr_rmatvec, sigmoid, logistic_loss_sum
    if name not in ("numpy", "numba"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        warnings.warn("numba not available; falling back to the numpy kernels")
        name = "numpy"
    _active = name
    csr_matvec, csr_rmatvec, sigmoid, logistic_loss_sum = _BACKENDS[name]
    return name


def active_backend() -> str:
    return _active


set_backend(os.environ.get(BACKEND_ENV, "numba" if HAS_NUMBA else "numpy"))


def stack_csr(vectors) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Stack SparseVectors into CSR arrays (indptr, indices, data, dim)."""
    dims = {v.dimension for v in vectors}
    if len(dims) > 1:
        raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
    dim = dims.pop() if dims else 0
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    chunks_idx = []
    chunks_val = []
    for i, vec in enumerate(vectors):
        idx, val = vec.to_arrays()
        indptr[i + 1] = indptr[i] + idx.shape[0]
        chunks_idx.append(idx)
        chunks_val.append(val)
    indices = np.concatenate(chunks_idx) if chunks_idx else np.zeros(0, dtype=np.int64)
    data = np.concatenate(chunks_val) if chunks_val else np.zeros(0)
    return indptr, indices, data, dim
