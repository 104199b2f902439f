"""Ridge regression as a symmetric positive definite linear system ``A w = b``.

Three routes produce the system from a feature matrix ``X`` (n x d) and
targets ``y``:

* primal: ``A = X^T X + lam I`` (d x d), ``b = X^T y``
* dual:   ``A = X X^T + lam I`` (n x n), ``b = y``; weights are ``X^T alpha``
* kernel: ``A = K (K + lam I)`` (n x n), ``b = K y`` with the Gaussian kernel
  ``K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2))``
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import ContractViolation, InputError
from .linalg import as_matrix, as_vector, check_symmetric, is_sparse, symmetrize, to_dense

ROUTES = ("primal", "dual", "kernel", "system")

#: Systems larger than this skip the Cholesky positive-definiteness spot check.
PD_CHECK_MAX_DIM = 2000


@dataclass(frozen=True)
class RidgeProblem:
    """The system ``A w = b`` together with what is needed to map back to data.

    Attributes
    ----------
    A : ndarray or csr_matrix of shape (m, m)
        Symmetric system matrix.
    b : ndarray of shape (m,)
    lam : float
        Ridge regularization parameter.
    route : {'primal', 'dual', 'kernel', 'system'}
        How ``A`` was assembled. ``'system'`` marks a raw system given directly.
    X : ndarray, csr_matrix or None
        Original feature matrix, kept for weight recovery and prediction.
    sigma : float or None
        Kernel bandwidth (kernel route only).
    """

    A: object
    b: np.ndarray
    lam: float
    route: str
    X: Optional[object] = None
    sigma: Optional[float] = None

    @property
    def m(self):
        return self.A.shape[0]

    @classmethod
    def from_system(cls, A, b):
        """Wrap an existing symmetric system without any data provenance."""
        A = as_matrix(A, "A")
        b = as_vector(b, "b")
        if A.shape != (b.size, b.size):
            raise InputError(f"A has shape {A.shape} but b has length {b.size}")
        check_symmetric(A, "A")
        return cls(A=A, b=b, lam=0.0, route="system")


def _check_data(X, y, lam):
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    n, d = X.shape
    if n < 1 or d < 1:
        raise InputError("X must have at least one row and one column")
    if y.size != n:
        raise InputError(f"X has {n} rows but y has length {y.size}")
    if not np.isfinite(lam) or lam < 0:
        raise InputError(f"lambda must be a finite non-negative number, got {lam}")
    return X, y, float(lam)


def _add_ridge(B, lam):
    if is_sparse(B):
        return sp.csr_matrix(B + lam * sp.identity(B.shape[0], format="csr"))
    B = np.array(B, dtype=np.float64)
    B[np.diag_indices_from(B)] += lam
    return B


def _spot_check_pd(A, route):
    if A.shape[0] > PD_CHECK_MAX_DIM:
        return
    try:
        np.linalg.cholesky(to_dense(A))
    except np.linalg.LinAlgError:
        raise ContractViolation(
            f"{route} system matrix failed the positive-definiteness check"
        ) from None


def build_primal(X, y, lam):
    """``(X^T X + lam I) w = X^T y``."""
    X, y, lam = _check_data(X, y, lam)
    B = X.T @ X
    A = symmetrize(_add_ridge(B, lam))
    if is_sparse(A):
        A = as_matrix(A)
    b = np.asarray(X.T @ y, dtype=np.float64).ravel()
    if lam > 0:
        _spot_check_pd(A, "primal")
    return RidgeProblem(A=A, b=b, lam=lam, route="primal", X=X)


def build_dual(X, y, lam):
    """``(X X^T + lam I) alpha = y``; recover weights with ``X^T alpha``."""
    X, y, lam = _check_data(X, y, lam)
    B = X @ X.T
    A = symmetrize(_add_ridge(B, lam))
    if is_sparse(A):
        A = as_matrix(A)
    if lam > 0:
        _spot_check_pd(A, "dual")
    return RidgeProblem(A=A, b=y.copy(), lam=lam, route="dual", X=X)


def gaussian_kernel(X, Z=None, sigma=1.0):
    """Gaussian (RBF) kernel matrix between the rows of ``X`` and ``Z``."""
    if sigma <= 0 or not np.isfinite(sigma):
        raise InputError(f"sigma must be positive, got {sigma}")
    Xd = to_dense(X)
    Zd = Xd if Z is None else to_dense(Z)
    sq_x = np.einsum("ij,ij->i", Xd, Xd)
    sq_z = sq_x if Z is None else np.einsum("ij,ij->i", Zd, Zd)
    dist2 = sq_x[:, None] + sq_z[None, :] - 2.0 * (Xd @ Zd.T)
    np.maximum(dist2, 0.0, out=dist2)
    if Z is None:
        np.fill_diagonal(dist2, 0.0)
    return np.exp(-dist2 / (2.0 * sigma**2))


def build_kernel(X, y, lam, sigma):
    """Kernel ridge system ``K (K + lam I) alpha = K y`` (dense)."""
    X, y, lam = _check_data(X, y, lam)
    if sigma is None or not np.isfinite(sigma) or sigma <= 0:
        raise InputError(f"sigma must be positive, got {sigma}")
    K = gaussian_kernel(X, sigma=sigma)
    K = 0.5 * (K + K.T)
    A = symmetrize(K @ _add_ridge(K, lam))
    b = K @ y
    return RidgeProblem(A=A, b=b, lam=lam, route="kernel", X=X, sigma=float(sigma))


def auto_select(X, y, lam):
    """Primal system when ``d <= n`` (ties included), dual otherwise."""
    X = as_matrix(X, "X")
    n, d = X.shape
    return build_primal(X, y, lam) if d <= n else build_dual(X, y, lam)


def recover_weights(problem, solution):
    """Map a solution of ``A w = b`` back to model coefficients.

    Primal and raw systems return the solution unchanged, the dual route
    returns ``X^T alpha`` and the kernel route returns the dual coefficients
    ``alpha`` themselves (use :func:`predict_kernel` for predictions).
    """
    sol = as_vector(solution, "solution")
    if sol.size != problem.m:
        raise InputError(f"solution has length {sol.size}, expected {problem.m}")
    if problem.route == "dual":
        return np.asarray(problem.X.T @ sol, dtype=np.float64).ravel()
    if problem.route in ("primal", "kernel", "system"):
        return sol.copy()
    raise InputError(f"unknown route {problem.route!r}")


def predict_kernel(problem, alpha, x_new):
    """``sum_i alpha_i K(x_i, x_new)`` for one point or a batch of points.

    Returns a float for a single point of shape (d,) and an array of shape
    (k,) for a batch of shape (k, d).
    """
    if problem.route != "kernel":
        raise InputError("predict_kernel requires a kernel-route problem")
    alpha = as_vector(alpha, "alpha")
    if alpha.size != problem.m:
        raise InputError(f"alpha has length {alpha.size}, expected {problem.m}")
    x = np.asarray(x_new, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != problem.X.shape[1]:
        raise InputError(f"x_new has {x.shape[1]} features, expected {problem.X.shape[1]}")
    k = gaussian_kernel(problem.X, x, sigma=problem.sigma)
    out = alpha @ k
    return float(out[0]) if single else out
