"""Matrix containers and small dense linear-algebra kernels.

Dense matrices are plain ``numpy.ndarray`` objects of dtype float64 and sparse
matrices are ``scipy.sparse.csr_matrix``. The helpers here validate and
canonicalize both, and provide the least-norm subsolver used by every
sketch-and-project iteration, the fast Walsh-Hadamard transform and a checked
symmetric eigendecomposition used by the rate oracles.
"""

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, InputError

#: Relative eigenvalue cutoff of :func:`least_norm_solution`.
PINV_RCOND = 1e-10
#: Relative tolerance of the symmetry checks.
SYMMETRY_RTOL = 1e-9
#: Largest dimension accepted by :func:`eig_sym`.
EIG_SYM_MAX_DIM = 2000


def is_sparse(M):
    return sp.issparse(M)


def as_vector(v, name="vector"):
    """Return ``v`` as a finite 1-D float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_matrix(M, name="matrix"):
    """Validate ``M`` and return it as a dense float64 array or canonical CSR.

    Sparse inputs of any scipy format are converted to CSR with sorted,
    deduplicated column indices. Dense inputs are converted to a C-contiguous
    float64 array.
    """
    if sp.issparse(M):
        csr = sp.csr_matrix(M, dtype=np.float64)
        if not csr.has_canonical_format:
            csr = csr.copy()
            csr.sum_duplicates()
        if not np.all(np.isfinite(csr.data)):
            raise InputError(f"{name} contains non-finite entries")
        return csr
    arr = np.ascontiguousarray(M, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def to_dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def symmetry_defect(M):
    """Return ``max|M - M^T| / max(max|M|, tiny)``."""
    if sp.issparse(M):
        diff = abs(M - M.T)
        num = diff.max() if diff.nnz else 0.0
        den = abs(M).max() if M.nnz else 0.0
    else:
        num = np.max(np.abs(M - M.T)) if M.size else 0.0
        den = np.max(np.abs(M)) if M.size else 0.0
    return float(num) / max(float(den), np.finfo(float).tiny)


def check_symmetric(M, name="matrix", rtol=SYMMETRY_RTOL):
    if M.shape[0] != M.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {M.shape}")
    defect = symmetry_defect(M)
    if defect > rtol:
        raise ContractViolation(
            f"{name} is not symmetric (relative defect {defect:.3e} > {rtol:.0e})"
        )


def symmetrize(M):
    """Return ``(M + M^T) / 2``, preserving the storage format."""
    if sp.issparse(M):
        return sp.csr_matrix((M + M.T) * 0.5)
    return 0.5 * (M + M.T)


def least_norm_solution(M, r):
    """Minimum-norm least-squares solution of ``M x = r`` for symmetric PSD ``M``.

    Computes ``M^+ r`` from the symmetric eigendecomposition of ``M``.
    Eigenvalues at or below ``1e-10 * lambda_max(M)`` are treated as zero, so
    rank-deficient sketched systems are handled gracefully.

    Parameters
    ----------
    M : ndarray of shape (tau, tau)
        Symmetric positive semi-definite matrix.
    r : ndarray of shape (tau,)
        Right-hand side.

    Returns
    -------
    x : ndarray of shape (tau,)
    """
    M = np.asarray(M, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise InputError(f"expected a non-empty square matrix, got shape {M.shape}")
    if r.shape != (M.shape[0],):
        raise InputError(f"right-hand side has shape {r.shape}, expected ({M.shape[0]},)")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(r))):
        raise InputError("least_norm_solution received non-finite input")
    if M.shape[0] == 1:
        m00 = M[0, 0]
        if m00 <= 0.0:
            return np.zeros(1)
        return r / m00
    check_symmetric(M, "sketched matrix")
    evals, evecs = np.linalg.eigh(M)
    cutoff = PINV_RCOND * evals[-1]
    keep = evals > cutoff
    if evals[-1] <= 0.0 or not np.any(keep):
        return np.zeros_like(r)
    V = evecs[:, keep]
    return V @ ((V.T @ r) / evals[keep])


def _check_power_of_two(n):
    if n < 1 or n & (n - 1):
        raise InputError(f"length {n} is not a power of two")


def fwht(v):
    """Unnormalized fast Walsh-Hadamard transform along the first axis.

    Returns ``H_m @ v`` where ``H_m`` is the Sylvester-ordered Hadamard matrix
    (``H_1 = [1]``, ``H_2m = [[H_m, H_m], [H_m, -H_m]]``). ``v`` may be a vector
    or a 2-D array, in which case every column is transformed. Runs in
    ``O(m log m)`` per column; no scaling is applied.
    """
    x = np.array(v, dtype=np.float64, copy=True)
    if x.ndim not in (1, 2):
        raise InputError("fwht expects a vector or a 2-D array")
    m = x.shape[0]
    _check_power_of_two(m)
    tail = x.shape[1:]
    h = 1
    while h < m:
        blocks = x.reshape((m // (2 * h), 2, h) + tail)
        top = blocks[:, 0].copy()
        bottom = blocks[:, 1]
        blocks[:, 0] += bottom
        top -= bottom
        blocks[:, 1] = top
        h *= 2
    return x


def hadamard_entries(rows, cols):
    """Entries ``H[rows[:, None], cols[None, :]]`` of the Sylvester Hadamard matrix."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    parity = np.bitwise_count(rows[:, None] & cols[None, :]) & 1
    return 1.0 - 2.0 * parity


def next_power_of_two(m):
    """Smallest power of two ``>= m`` (``2**ceil(log2 m)``)."""
    if m < 1:
        raise InputError("dimension must be positive")
    return 1 << (int(m) - 1).bit_length()


def select_rows(M, indices):
    """Rows ``indices`` of ``M`` in the given order.

    Only the selected rows are touched; works for dense arrays and CSR.
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    n_rows = M.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n_rows):
        raise InputError(f"row index out of range [0, {n_rows})")
    return M[idx]


def eig_sym(M):
    """Eigen-decomposition of a small symmetric matrix.

    Returns
    -------
    evals : ndarray
        Eigenvalues in ascending order.
    evecs : ndarray
        Orthonormal eigenvectors stored column-wise.
    """
    M = to_dense(M).astype(np.float64, copy=False)
    if M.ndim != 2:
        raise InputError("eig_sym expects a 2-D matrix")
    if M.shape[0] > EIG_SYM_MAX_DIM:
        raise InputError(f"eig_sym is limited to dimension {EIG_SYM_MAX_DIM}")
    if not np.all(np.isfinite(M)):
        raise InputError("eig_sym received non-finite input")
    check_symmetric(M)
    return np.linalg.eigh(0.5 * (M + M.T))


def sqrtm_psd(M):
    """Symmetric square root of a PSD matrix via :func:`eig_sym`."""
    evals, evecs = eig_sym(M)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T


def pinv_psd(M, rcond=PINV_RCOND):
    """Pseudo-inverse of a symmetric PSD matrix with relative eigenvalue cutoff."""
    evals, evecs = eig_sym(M)
    if evals[-1] <= 0.0:
        return np.zeros_like(evecs)
    keep = evals > rcond * evals[-1]
    V = evecs[:, keep]
    return (V / evals[keep]) @ V.T
