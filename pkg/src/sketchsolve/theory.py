"""Convergence-rate quantities of sketch-and-project computed by enumeration.

These are oracle-scale tools: every function forms dense ``m x m`` matrices
and runs symmetric eigendecompositions. A sketch distribution with finitely
many realizations is represented explicitly by :class:`DiscreteSketchEnsemble`;
everything else is estimated by Monte Carlo with a reported standard error.

Notation: ``H_S = S (S^T A S)^+ S^T`` and ``E[H]`` its expectation over the
sketch distribution. The linear rate of plain sketch-and-project is
``rho = lambda_min^+(A^{1/2} E[H] A^{1/2})``.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .errors import InputError
from .linalg import eig_sym, pinv_psd, sqrtm_psd, to_dense
from .sketches import SketchConfig, make_sampler, materialize
from .solvers import AccelParams

#: Eigenvalues below this fraction of the largest count as zero.
EIG_ZERO_RTOL = 1e-12
#: Largest (m, tau) for which all subsets are enumerated.
ENUM_MAX_M = 12
ENUM_MAX_TAU = 3
#: Largest dimension accepted by the oracles.
ORACLE_MAX_DIM = 200


def _dense_spd(A):
    A = np.asarray(to_dense(A), dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"A must be square, got shape {A.shape}")
    if A.shape[0] > ORACLE_MAX_DIM:
        raise InputError(f"oracle computations are limited to m <= {ORACLE_MAX_DIM}")
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class DiscreteSketchEnsemble:
    """Finite sketch distribution: realization ``S_i`` with probability ``p_i``.

    Attributes
    ----------
    realizations : ndarray of shape (q, m, tau)
    probabilities : ndarray of shape (q,)
    """

    realizations: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.realizations, dtype=np.float64)
        if S.ndim == 2:
            S = S[None]
        p = np.asarray(self.probabilities, dtype=np.float64).ravel()
        if S.ndim != 3 or S.shape[0] != p.size or p.size == 0:
            raise InputError("need one probability per realization")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise InputError(f"probabilities must be non-negative and sum to 1, got sum {p.sum()}")
        object.__setattr__(self, "realizations", S)
        object.__setattr__(self, "probabilities", p)

    @property
    def m(self):
        return self.realizations.shape[1]

    @property
    def size(self):
        return self.realizations.shape[0]

    @classmethod
    def identity(cls, m):
        """Deterministic ``S = I``."""
        return cls(np.eye(m)[None], np.ones(1))

    @classmethod
    def subsample(cls, m, tau):
        """All ``tau``-subsets of the identity columns, uniformly."""
        if m > ENUM_MAX_M or tau > ENUM_MAX_TAU:
            raise InputError(
                f"subset enumeration is limited to m <= {ENUM_MAX_M} and tau <= {ENUM_MAX_TAU}; "
                "use estimate_expected_projection instead"
            )
        if not 1 <= tau <= m:
            raise InputError(f"sketch size {tau} outside [1, {m}]")
        eye = np.eye(m)
        subsets = list(combinations(range(m), tau))
        S = np.stack([eye[:, list(c)] for c in subsets])
        return cls(S, np.full(len(subsets), 1.0 / comb(m, tau)))

    @classmethod
    def coordinate(cls, A):
        """Coordinate vectors ``e_i`` with probability ``A_ii / trace(A)``."""
        d = np.asarray(to_dense(A).diagonal(), dtype=np.float64)
        if np.any(d <= 0):
            raise InputError("coordinate sampling needs a strictly positive diagonal")
        m = d.size
        return cls(np.eye(m)[:, :, None].transpose(1, 0, 2).copy(), d / d.sum())

    @classmethod
    def single_column(cls, A, vectors):
        """Unit columns ``s_j`` with probability proportional to ``s_j^T A s_j``."""
        A = _dense_spd(A)
        F = _unit_columns(vectors, A.shape[0])
        weights = np.einsum("ij,ik,kj->j", F, A, F)
        if np.any(weights <= 0):
            raise InputError("every column must satisfy s^T A s > 0")
        return cls(F.T[:, :, None].copy(), weights / weights.sum())


def _unit_columns(vectors, m):
    F = np.asarray(vectors, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != m:
        raise InputError(f"vectors must have length {m}")
    norms = np.linalg.norm(F, axis=0)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise InputError("all sketch vectors must have unit norm")
    return F


def _h(A, S):
    return S @ pinv_psd(S.T @ A @ S) @ S.T


def expected_projection(A, ensemble):
    """``E[H] = sum_i p_i S_i (S_i^T A S_i)^+ S_i^T`` by enumeration.

    Parameters
    ----------
    A : array_like of shape (m, m)
        Symmetric positive definite, ``m <= 200``.
    ensemble : DiscreteSketchEnsemble

    Returns
    -------
    ndarray of shape (m, m)
        Symmetric positive semi-definite matrix.
    """
    A = _dense_spd(A)
    if ensemble.m != A.shape[0]:
        raise InputError(f"ensemble has dimension {ensemble.m}, A has {A.shape[0]}")
    EH = np.zeros_like(A)
    for p, S in zip(ensemble.probabilities, ensemble.realizations):
        if p > 0:
            EH += p * _h(A, S)
    return 0.5 * (EH + EH.T)


def estimate_expected_projection(A, sketch, n_draws, seed=0):
    """Monte-Carlo estimate of ``E[H]`` and its entrywise standard error.

    ``sketch`` is either a :class:`DiscreteSketchEnsemble` (realization counts
    are drawn from a multinomial, so very large ``n_draws`` are cheap) or
    anything accepted by :func:`~sketchsolve.sketches.make_sampler`.

    Returns
    -------
    mean, stderr : ndarray of shape (m, m)
    """
    A = _dense_spd(A)
    m = A.shape[0]
    rng = np.random.Generator(np.random.Philox(seed))
    if n_draws < 2:
        raise InputError("need at least two draws")
    if isinstance(sketch, DiscreteSketchEnsemble):
        counts = rng.multinomial(n_draws, sketch.probabilities)
        first = np.zeros((m, m))
        second = np.zeros((m, m))
        for c, S in zip(counts, sketch.realizations):
            if c:
                H = _h(A, S)
                first += c * H
                second += c * H * H
    else:
        sample = make_sampler(sketch, m)
        first = np.zeros((m, m))
        second = np.zeros((m, m))
        for _ in range(n_draws):
            H = _h(A, materialize(sample(rng)))
            first += H
            second += H * H
    mean = first / n_draws
    var = np.clip(second / n_draws - mean**2, 0.0, None) * n_draws / (n_draws - 1)
    return 0.5 * (mean + mean.T), np.sqrt(var / n_draws)


def _lambda_min_positive(M):
    evals = eig_sym(M)[0]
    top = evals[-1]
    if top <= 0:
        return 0.0
    positive = evals[evals > EIG_ZERO_RTOL * top]
    return float(positive[0])


def rate_rho(A, ensemble=None, expected=None):
    """Linear rate ``rho = lambda_min^+(A^{1/2} E[H] A^{1/2})``.

    Either an ensemble or a precomputed ``E[H]`` (e.g. a Monte-Carlo
    estimate) must be given.
    """
    A = _dense_spd(A)
    if expected is None:
        if ensemble is None:
            raise InputError("rate_rho needs an ensemble or an expected projection")
        expected = expected_projection(A, ensemble)
    root = sqrtm_psd(A)
    return _lambda_min_positive(root @ expected @ root)


def lambda_min_expected_projection(A, ensemble):
    """``lambda_min(E[H])`` (zero if ``E[H]`` is singular)."""
    evals = eig_sym(expected_projection(A, ensemble))[0]
    return float(max(evals[0], 0.0))


def lambda_min_EH_single_column(A, vectors):
    """``lambda_min(E[H]) = lambda_min(F F^T) / sum_j s_j^T A s_j``.

    Valid for unit columns ``s_j`` (the columns of ``F``) sampled with
    probability proportional to ``s_j^T A s_j``.
    """
    A = _dense_spd(A)
    F = _unit_columns(vectors, A.shape[0])
    denom = float(np.einsum("ij,ik,kj->", F, A, F))
    lam = eig_sym(F @ F.T)[0][0]
    return float(max(lam, 0.0)) / denom


def spectrum_summary(A):
    """``(trace, lambda_min, lambda_max)`` of a symmetric matrix."""
    A = _dense_spd(A)
    evals = eig_sym(A)[0]
    return float(np.trace(A)), float(evals[0]), float(evals[-1])


def cd_complexities(A, epsilon):
    """Iteration bounds of coordinate descent with and without momentum.

    Returns
    -------
    t_momentum : float
        ``4 trace(A) / epsilon`` (theoretical schedule with ``eta = 1/2``).
    t_plain : float
        ``trace(A) / lambda_min(A) * ln(lambda_max(A) / epsilon)``.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    tr, lo, hi = spectrum_summary(A)
    if lo <= 0:
        raise InputError("A must be positive definite")
    return 4.0 * tr / epsilon, tr / lo * np.log(hi / epsilon)


def superiority_region(kappa):
    """Scaled precisions where the momentum bound beats the linear one.

    For ``kappa >= 16`` returns the closed interval
    ``(1/2 - sqrt(1 - 16/kappa)/2, 1/2 + sqrt(1 - 16/kappa)/2)`` on which
    ``eps (1 - eps) >= 4 / kappa``; returns ``None`` for ``kappa < 16``.
    """
    if not kappa >= 1:
        raise InputError(f"condition number must be >= 1, got {kappa}")
    if kappa < 16:
        return None
    half = 0.5 * np.sqrt(max(1.0 - 16.0 / kappa, 0.0))
    return 0.5 - half, 0.5 + half


def momentum_bound(eta, k, init_err, lambda_min_EH):
    """Last-iterate bound ``init / (lambda_min_EH * k * eta (1 - eta))`` on ``||A w^k - b||^2``.

    ``init`` is ``||w^0 - w*||_A^2`` and ``eta`` the constant parameter of the
    theoretical momentum schedule.
    """
    if not 0.0 < eta < 1.0:
        raise InputError(f"eta must lie in (0, 1), got {eta}")
    if k < 1:
        raise InputError("k must be at least 1")
    if not lambda_min_EH > 0:
        raise InputError("lambda_min(E[H]) must be positive")
    return init_err / (lambda_min_EH * k * eta * (1.0 - eta))


def momentum_bound_general(etas, init_err, lambda_min_EH):
    """Bound ``init / (lambda_min_EH * sum_t eta_t (1 - eta_t))`` for a sequence of ``eta``.

    The sum runs over all entries of ``etas``; passing ``eta_0, ..., eta_{k-1}``
    for a constant ``eta`` reproduces :func:`momentum_bound`, while passing
    ``eta_0, ..., eta_k`` gives the slightly tighter sum over ``t <= k``.
    """
    etas = np.asarray(etas, dtype=np.float64)
    if etas.size == 0 or np.any(etas <= 0) or np.any(etas > 1):
        raise InputError("etas must be a non-empty sequence in (0, 1]")
    total = float(np.sum(etas * (1.0 - etas)))
    if total <= 0 or not lambda_min_EH > 0:
        raise InputError("bound undefined: zero denominator")
    return init_err / (lambda_min_EH * total)


def _weighted_pencil_max(num, den):
    """Largest ``x^T num x / x^T den x`` over ``range(den)``, with a rank flag."""
    evals, evecs = eig_sym(den)
    keep = evals > EIG_ZERO_RTOL * evals[-1]
    V = evecs[:, keep] / np.sqrt(evals[keep])
    M = V.T @ num @ V
    return float(eig_sym(0.5 * (M + M.T))[0][-1]), not np.all(keep), float(evals[keep][0])


def accel_params_exact(A, ensemble, inner_product="euclidean"):
    """Exact acceleration parameters ``(mu, nu)`` of a sketch distribution.

    ``mu`` is the smallest eigenvalue of ``E[Z]`` on its range and ``nu`` the
    largest generalized eigenvalue of the pencil ``(E[Z E[Z]^+ Z], E[Z])``.

    Parameters
    ----------
    A : array_like of shape (m, m)
    ensemble : DiscreteSketchEnsemble
    inner_product : {'euclidean', 'A'}
        ``'euclidean'`` uses ``Z = A S (S^T A S)^+ S^T A``; with ``S = I`` this
        gives ``mu = lambda_min(A)`` and ``nu = 1``. ``'A'`` uses the
        projector ``Z = A^{1/2} S (S^T A S)^+ S^T A^{1/2}`` of the A-weighted
        geometry, for which ``0 < mu <= 1/nu <= 1`` always holds; with
        coordinate sampling ``p_i = A_ii / trace(A)`` it gives
        ``mu = lambda_min(A) / trace(A)`` and ``nu = trace(A) / min_i A_ii``.

    Returns
    -------
    AccelParams
        ``rank_deficient`` is set when ``E[Z]`` is singular, in which case
        ``mu`` is its smallest nonzero eigenvalue.
    """
    A = _dense_spd(A)
    if inner_product == "euclidean":
        left = A
    elif inner_product == "A":
        left = sqrtm_psd(A)
    else:
        raise InputError(f"unknown inner product {inner_product!r}")
    Zs = []
    EZ = np.zeros_like(A)
    for p, S in zip(ensemble.probabilities, ensemble.realizations):
        L = left @ S
        Z = L @ pinv_psd(S.T @ A @ S) @ L.T
        Zs.append((p, Z))
        EZ += p * Z
    EZ = 0.5 * (EZ + EZ.T)
    EZ_pinv = pinv_psd(EZ, rcond=EIG_ZERO_RTOL)
    second = np.zeros_like(A)
    for p, Z in Zs:
        second += p * (Z @ EZ_pinv @ Z)
    second = 0.5 * (second + second.T)
    nu, deficient, mu = _weighted_pencil_max(second, EZ)
    return AccelParams(mu=mu, nu=nu, rank_deficient=deficient)


@dataclass(frozen=True)
class RateCertificate:
    """Spectral and rate quantities of one system and sketch distribution."""

    rho: float
    lambda_min_EH: float
    trace_A: float
    lambda_min_A: float
    lambda_max_A: float
    kappa: float
    mu: Optional[float] = None
    nu: Optional[float] = None
    ensemble: str = ""

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def certify(A, ensemble, label="", with_accel=True):
    """Build a :class:`RateCertificate` for ``A`` and ``ensemble``.

    The acceleration parameters use the A-weighted inner product, for which
    they are guaranteed to be feasible.
    """
    A = _dense_spd(A)
    tr, lo, hi = spectrum_summary(A)
    EH = expected_projection(A, ensemble)
    rho = rate_rho(A, expected=EH)
    lam_eh = float(max(eig_sym(EH)[0][0], 0.0))
    mu = nu = None
    if with_accel:
        params = accel_params_exact(A, ensemble, inner_product="A")
        mu, nu = params.mu, params.nu
    return RateCertificate(
        rho=rho,
        lambda_min_EH=lam_eh,
        trace_A=tr,
        lambda_min_A=lo,
        lambda_max_A=hi,
        kappa=hi / lo if lo > 0 else float("inf"),
        mu=mu,
        nu=nu,
        ensemble=label,
    )


def sketch_ensemble(config, A):
    """Enumerable ensemble for a sketch configuration, or ``None``.

    Only uniform subsampling with ``m <= 12`` and ``tau <= 3`` is enumerated.
    """
    if not isinstance(config, SketchConfig):
        return None
    m = A.shape[0]
    if config.kind == "subsample" and m <= ENUM_MAX_M and config.sketch_size <= ENUM_MAX_TAU:
        return DiscreteSketchEnsemble.subsample(m, config.sketch_size)
    return None
