"""Random sketching transforms ``S`` (m x tau) used by sketch-and-project.

Every sketch kind follows the same protocol: :func:`draw` produces a fresh
realization (a *state*) from a ``numpy.random.Generator``, and the state
knows how to form the sketched system ``(S^T A, S^T A S, S^T r)``, how to add
``S @ delta`` to an iterate, and how to write ``S`` out explicitly (used as a
test oracle only).

Randomness is consumed in a fixed order per kind, so a fixed generator seed
gives a fixed sequence of realizations:

subsample
    ``C = rng.choice(m, tau, replace=False)``, then sorted ascending.
gaussian
    ``G = rng.standard_normal((m, tau))``.
count
    a permutation of all m rows, then m random signs. The permuted rows are
    split into tau contiguous, nearly equal groups that are summed.
subcount
    ``s`` rows without replacement (in drawn order), then s random signs;
    consecutive groups of ``k`` signed rows are summed.
srht
    ``m'`` random signs, then ``tau`` rows of ``H_{m'}`` without replacement
    (sorted), where ``m'`` is the next power of two. Dimensions that are not
    powers of two are handled by implicit zero-row padding of ``A``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .linalg import (
    fwht,
    hadamard_entries,
    is_sparse,
    next_power_of_two,
    select_rows,
    to_dense,
)

SKETCH_KINDS = ("subsample", "gaussian", "count", "subcount", "srht")

#: Sum size used by the SubCount sketch whenever ``10 * tau <= m``.
SUBCOUNT_SUM_SIZE = 10


def subcount_params(tau, m):
    """Subsampling size ``s`` and sum size ``k`` of a SubCount sketch.

    ``k = 10`` and ``s = 10 tau`` when ``10 tau <= m``, otherwise
    ``k = floor(m / tau)`` and ``s = k tau``.
    """
    tau, m = int(tau), int(m)
    if tau < 1 or tau > m:
        raise InputError(f"sketch size {tau} outside [1, {m}]")
    if SUBCOUNT_SUM_SIZE * tau <= m:
        k = SUBCOUNT_SUM_SIZE
    else:
        k = m // tau
    return k * tau, k


@dataclass(frozen=True)
class SketchConfig:
    """Which sketch to draw and how large.

    Parameters
    ----------
    kind : str
        One of ``subsample``, ``gaussian``, ``count``, ``subcount``, ``srht``.
    sketch_size : int
        Number of columns ``tau`` of ``S``.
    seed : int, optional
        Only used when :func:`draw` is called without a generator.
    """

    kind: str = "subsample"
    sketch_size: int = 1
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SKETCH_KINDS:
            raise InputError(f"unknown sketch kind {self.kind!r}; expected one of {SKETCH_KINDS}")
        if int(self.sketch_size) < 1:
            raise InputError(f"sketch size must be >= 1, got {self.sketch_size}")

    def validate(self, m):
        if self.sketch_size > m:
            raise InputError(f"sketch size {self.sketch_size} exceeds dimension {m}")


@dataclass(frozen=True)
class SketchOutcome:
    """Sketched system for one realization of ``S``.

    ``SA`` is ``S^T A`` (tau x m, dense or CSR), ``SAS`` is ``S^T A S`` (dense
    tau x tau) and ``rs`` is ``S^T r``. Because ``A`` is symmetric,
    ``SA.T @ delta`` equals ``A S delta``.
    """

    SA: object
    SAS: np.ndarray
    rs: np.ndarray

    def AS_dot(self, delta):
        """``A S delta`` computed as ``(S^T A)^T delta``."""
        return np.asarray(self.SA.T @ delta, dtype=np.float64).ravel()


def _dense_sas(M):
    M = to_dense(M)
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SubsampleState:
    """``S = I_C``: columns ``C`` of the identity."""

    m: int
    indices: np.ndarray

    @property
    def tau(self):
        return self.indices.size

    def sketch(self, A, r):
        C = self.indices
        SA = select_rows(A, C)
        SAS = SA[:, C]
        return SketchOutcome(SA=SA, SAS=_dense_sas(SAS), rs=r[C].copy())

    def add_to(self, w, delta, coef):
        w[self.indices] += coef * delta
        return w

    def matrix(self):
        S = np.zeros((self.m, self.tau))
        S[self.indices, np.arange(self.tau)] = 1.0
        return S


@dataclass(frozen=True)
class GaussianState:
    """Dense ``S`` with i.i.d. standard normal entries."""

    m: int
    G: np.ndarray

    @property
    def tau(self):
        return self.G.shape[1]

    def sketch(self, A, r):
        G = self.G
        # A is symmetric, so S^T A = (A S)^T; this also densifies CSR input
        SA = np.ascontiguousarray(np.asarray(A @ G).T)
        return SketchOutcome(SA=SA, SAS=_dense_sas(SA @ G), rs=G.T @ r)

    def add_to(self, w, delta, coef):
        w += coef * (self.G @ delta)
        return w

    def matrix(self):
        return self.G.copy()


@dataclass(frozen=True)
class CountState:
    """``S^T = Sigma D I_C`` with one signed input row per output row bucket.

    ``rows[j]`` is the input row routed to output row ``buckets[j]`` with sign
    ``signs[j]``.
    """

    m: int
    n_buckets: int
    rows: np.ndarray
    signs: np.ndarray
    buckets: np.ndarray
    St: sp.csr_matrix = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.St is None:
            St = sp.csr_matrix(
                (self.signs, (self.buckets, self.rows)), shape=(self.n_buckets, self.m)
            )
            object.__setattr__(self, "St", St)

    @property
    def tau(self):
        return self.n_buckets

    def sketch(self, A, r):
        St = self.St
        SA = St @ A
        if is_sparse(SA):
            SA = sp.csr_matrix(SA)
            SAS = (St @ SA.T).toarray()
        else:
            SA = np.asarray(SA)
            SAS = np.asarray(St @ SA.T)
        return SketchOutcome(SA=SA, SAS=_dense_sas(SAS), rs=St @ r)

    def add_to(self, w, delta, coef):
        w[self.rows] += coef * self.signs * delta[self.buckets]
        return w

    def matrix(self):
        return self.St.T.toarray()


@dataclass(frozen=True)
class SRHTState:
    """``S^T = (tau m')^{-1/2} I_C H_{m'} D`` restricted to the first m coordinates.

    ``m'`` is the next power of two; for ``m' > m`` this is the transform of
    ``A`` padded with zero rows.
    """

    m: int
    signs: np.ndarray
    indices: np.ndarray
    St: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.St is None:
            cols = np.arange(self.m)
            St = hadamard_entries(self.indices, cols) * self.signs[: self.m]
            object.__setattr__(self, "St", St * self.scale)

    @property
    def padded_m(self):
        return self.signs.size

    @property
    def tau(self):
        return self.indices.size

    @property
    def scale(self):
        return 1.0 / np.sqrt(self.tau * self.padded_m)

    def sketch(self, A, r):
        m, mp = self.m, self.padded_m
        DA = np.zeros((mp, m))
        DA[:m] = to_dense(A) * self.signs[:m, None]
        HDA = fwht(DA)
        SA = self.scale * HDA[self.indices]
        return SketchOutcome(SA=SA, SAS=_dense_sas(SA @ self.St.T), rs=self.St @ r)

    def add_to(self, w, delta, coef):
        w += coef * (self.St.T @ delta)
        return w

    def matrix(self):
        return self.St.T.copy()

    def padded_matrix(self):
        """The full ``m' x tau`` matrix before restriction to ``m`` rows."""
        cols = np.arange(self.padded_m)
        St = hadamard_entries(self.indices, cols) * self.signs * self.scale
        return St.T


def _random_signs(rng, size):
    return rng.integers(0, 2, size=size).astype(np.float64) * 2.0 - 1.0


def _draw_subsample(m, tau, rng):
    idx = np.sort(rng.choice(m, size=tau, replace=False))
    return SubsampleState(m=m, indices=idx.astype(np.int64))


def _draw_gaussian(m, tau, rng):
    return GaussianState(m=m, G=rng.standard_normal((m, tau)))


def _draw_count(m, tau, rng):
    rows = rng.permutation(m).astype(np.int64)
    signs = _random_signs(rng, m)
    # contiguous, nearly equal groups, same split as numpy.array_split
    sizes = np.full(tau, m // tau)
    sizes[: m % tau] += 1
    buckets = np.repeat(np.arange(tau), sizes)
    return CountState(m=m, n_buckets=tau, rows=rows, signs=signs, buckets=buckets)


def _draw_subcount(m, tau, rng):
    s, k = subcount_params(tau, m)
    rows = rng.choice(m, size=s, replace=False).astype(np.int64)
    signs = _random_signs(rng, s)
    buckets = np.arange(s) // k
    return CountState(m=m, n_buckets=tau, rows=rows, signs=signs, buckets=buckets)


def _draw_srht(m, tau, rng):
    mp = next_power_of_two(m)
    signs = _random_signs(rng, mp)
    idx = np.sort(rng.choice(mp, size=tau, replace=False)).astype(np.int64)
    return SRHTState(m=m, signs=signs, indices=idx)


_DRAWERS = {
    "subsample": _draw_subsample,
    "gaussian": _draw_gaussian,
    "count": _draw_count,
    "subcount": _draw_subcount,
    "srht": _draw_srht,
}


def draw(config, m, rng=None):
    """Draw a fresh realization of the sketch described by ``config``."""
    config.validate(m)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return _DRAWERS[config.kind](int(m), int(config.sketch_size), rng)


def apply(state, A, r):
    """Sketched system ``(S^T A, S^T A S, S^T r)`` for the realization ``state``."""
    if A.shape != (state.m, state.m):
        raise InputError(f"A has shape {A.shape}, sketch was drawn for m={state.m}")
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (state.m,):
        raise InputError(f"residual has shape {r.shape}, expected ({state.m},)")
    return state.sketch(A, r)


def apply_update(state, w, delta, step=1.0):
    """Return ``w - step * S @ delta`` without modifying ``w``."""
    w = np.array(w, dtype=np.float64, copy=True)
    delta = np.asarray(delta, dtype=np.float64)
    if w.shape != (state.m,) or delta.shape != (state.tau,):
        raise InputError("iterate or update has the wrong length for this sketch")
    if step == 0:
        return w
    return state.add_to(w, delta, -step)


def materialize(state, m=None):
    """Explicit ``m x tau`` matrix ``S`` of a realization (test oracle)."""
    if m is not None and m != state.m:
        raise InputError(f"state was drawn for m={state.m}, not {m}")
    return state.matrix()


class CoordinateSketch:
    """Single-coordinate sketches ``S = e_i`` with ``P(i) = A_ii / trace(A)``.

    This is the sampling that turns sketch-and-project into coordinate
    descent. It follows the same ``draw``/state protocol as the other sketch
    kinds, so it can be passed to the solvers directly.
    """

    kind = "coordinate"
    sketch_size = 1

    def __init__(self, A):
        self.m = A.shape[0]
        self.probabilities = coordinate_probabilities(A)
        self._cdf = np.cumsum(self.probabilities)
        self._cdf[-1] = 1.0

    def sample(self, rng, size=None):
        """Coordinate indices by inversion of the cumulative distribution."""
        u = rng.random(size)
        return np.searchsorted(self._cdf, u, side="right")

    def draw(self, rng):
        i = int(self.sample(rng))
        return SubsampleState(m=self.m, indices=np.array([i], dtype=np.int64))


def coordinate_probabilities(A):
    diag = np.asarray(A.diagonal(), dtype=np.float64)
    if np.any(diag <= 0):
        raise InputError("coordinate sampling needs a strictly positive diagonal")
    return diag / diag.sum()


def make_sampler(sketch, m):
    """Return a callable ``rng -> state`` for a SketchConfig or sketch object."""
    if isinstance(sketch, SketchConfig):
        sketch.validate(m)
        drawer = _DRAWERS[sketch.kind]
        tau = int(sketch.sketch_size)
        return lambda rng: drawer(m, tau, rng)
    if hasattr(sketch, "draw"):
        return sketch.draw
    raise InputError(f"cannot sample from {sketch!r}")


def pad_to_power_of_two(problem):
    """Pad ``A w = b`` to dimension ``m' = 2**ceil(log2 m)``.

    The padded matrix is ``diag(A, I)`` and the padded right-hand side is
    ``(b, 0)``, so the padded solution is ``(w*, 0)``: its first ``m`` entries
    solve the original system.

    Returns
    -------
    padded : RidgeProblem
        Raw (``route='system'``) problem of dimension ``m'``.
    m : int
        Original dimension.
    """
    from .problem import RidgeProblem

    A, b = problem.A, problem.b
    m = A.shape[0]
    mp = next_power_of_two(m)
    if mp == m:
        return problem, m
    extra = mp - m
    if is_sparse(A):
        Ap = sp.csr_matrix(sp.block_diag((A, sp.identity(extra)), format="csr"))
    else:
        Ap = np.zeros((mp, mp))
        Ap[:m, :m] = A
        Ap[np.arange(m, mp), np.arange(m, mp)] = 1.0
    bp = np.concatenate([b, np.zeros(extra)])
    return RidgeProblem(A=Ap, b=bp, lam=problem.lam, route="system"), m
