"""Iterative and direct solvers for ``A w = b`` with ``A`` symmetric positive definite.

All iterative solvers share the same stopping rule (relative residual
``||r^k|| / ||r^0|| <= tol`` or ``max_iter`` reached), start from ``w^0 = 0``
unless a warm start is given, draw one sketch per iteration from a Philox
generator seeded with ``config.seed``, and maintain the residual ``r = A w - b``
by cheap recurrences instead of recomputing it.
"""

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DivergenceError, InputError
from .linalg import as_vector, is_sparse, least_norm_solution, to_dense
from .schedules import MomentumSchedule, averaging_steps, eta_function
from .sketches import CoordinateSketch, SketchConfig, make_sampler

#: Relative residual above which a run is declared divergent.
DIVERGENCE_THRESHOLD = 1e8


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by the iterative solvers.

    Parameters
    ----------
    tol : float
        Relative residual tolerance ``epsilon``.
    max_iter : int
        Iteration budget.
    sketch : SketchConfig
        Sketch kind and size.
    step_size : float
        Step size ``gamma`` of plain sketch-and-project, in ``(0, 1]``.
    seed : int
        Seed of the per-run random generator.
    residual_refresh_every : int
        If positive, replace the maintained residual by ``A w - b`` every that
        many iterations.
    """

    tol: float = 1e-4
    max_iter: int = 1000
    sketch: SketchConfig = field(default_factory=SketchConfig)
    step_size: float = 1.0
    seed: int = 0
    residual_refresh_every: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError(f"tolerance must be positive, got {self.tol}")
        if not 0.0 < self.step_size <= 1.0:
            raise InputError(f"step size must lie in (0, 1], got {self.step_size}")
        if self.max_iter < 0:
            raise InputError("max_iter must be non-negative")
        if self.residual_refresh_every < 0:
            raise InputError("residual_refresh_every must be non-negative")


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``residual_trace[k]`` is ``||r^k|| / ||r^0||`` (so ``residual_trace[0] == 1``)
    and ``wall_times[k]`` the cumulative seconds spent after ``k`` iterations.
    ``residual`` is the final maintained residual (for the accelerated solver,
    the residual of ``w``); ``refreshed`` lists the iterations at which it was
    recomputed from scratch.
    """

    iterations: int
    converged: bool
    residual_trace: np.ndarray
    wall_times: np.ndarray
    solution: np.ndarray
    method: str = ""
    refreshed: tuple = ()
    residual: Optional[np.ndarray] = None


@dataclass(frozen=True)
class AccelParams:
    """Acceleration parameters ``(mu, nu)``.

    The accelerated solver requires ``0 < mu <= 1/nu <= 1`` (see
    :attr:`is_feasible`). Construction only checks that both values are finite
    and positive, so that exact values computed outside that domain (for
    instance ``mu = lambda_min(A) > 1`` without sketching) can still be
    reported.
    """

    mu: float
    nu: float
    rank_deficient: bool = False

    def __post_init__(self):
        mu, nu = self.mu, self.nu
        if not (np.isfinite(mu) and np.isfinite(nu)) or mu <= 0 or nu <= 0:
            raise InputError(f"acceleration parameters must be finite and positive, got mu={mu}, nu={nu}")

    @property
    def is_feasible(self):
        """Whether ``0 < mu <= 1/nu <= 1`` holds (with ``1e-12`` relative slack)."""
        tol = 1e-12
        return self.mu <= (1.0 / self.nu) * (1 + tol) and 1.0 / self.nu <= 1.0 + tol

    @property
    def coefficients(self):
        """``(alpha, beta, gamma)`` of the accelerated iteration."""
        mu, nu = self.mu, self.nu
        beta = 1.0 - np.sqrt(mu / nu)
        gamma = np.sqrt(1.0 / (mu * nu))
        alpha = 1.0 / (1.0 + np.sqrt(nu / mu))
        return alpha, beta, gamma


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def _matvec(A, x):
    return np.asarray(A @ x, dtype=np.float64).ravel()


class _Recorder:
    """Residual trace, timing and stopping logic shared by the solvers."""

    def __init__(self, method, norm0, tol):
        self.method = method
        self.norm0 = norm0
        self.tol = tol
        self.trace = [1.0]
        self.times = [0.0]
        self.refreshed = []
        self.start = time.perf_counter()

    def record(self, norm):
        rel = norm / self.norm0
        self.trace.append(rel)
        self.times.append(time.perf_counter() - self.start)
        return rel

    def done(self, rel):
        return rel <= self.tol

    def report(self, w, converged, residual=None):
        return SolveReport(
            iterations=len(self.trace) - 1,
            converged=converged,
            residual_trace=np.array(self.trace),
            wall_times=np.array(self.times),
            solution=w,
            method=self.method,
            refreshed=tuple(self.refreshed),
            residual=None if residual is None else residual.copy(),
        )

    def check(self, rel, w_fallback):
        if not np.isfinite(rel) or rel > DIVERGENCE_THRESHOLD:
            report = self.report(w_fallback.copy(), False)
            raise DivergenceError(
                f"{self.method} diverged at iteration {len(self.trace) - 1} "
                f"(relative residual {rel:.3e})",
                report,
            )


def _setup(problem, w0):
    A = problem.A
    b = as_vector(problem.b, "b")
    m = b.size
    if A.shape != (m, m):
        raise InputError(f"A has shape {A.shape} but b has length {m}")
    if w0 is None:
        w = np.zeros(m)
        r = -b
    else:
        w = as_vector(w0, "w0").copy()
        if w.size != m:
            raise InputError(f"warm start has length {w.size}, expected {m}")
        r = _matvec(A, w) - b
    return A, b, w, np.array(r, dtype=np.float64)


def _should_refresh(config, k):
    n = config.residual_refresh_every
    return n > 0 and k % n == 0


def solve_sketch_project(problem, config, *, sketch=None, w0=None, callback=None):
    """Sketch-and-project: project onto ``{w : S_k^T A w = S_k^T b}`` in the A-norm.

    Each iteration draws ``S_k``, solves the sketched system
    ``(S_k^T A S_k) delta = S_k^T r^k`` in the least-norm sense and updates

        w^{k+1} = w^k - gamma S_k delta_k,    r^{k+1} = r^k - gamma A S_k delta_k.

    Parameters
    ----------
    problem : RidgeProblem
    config : SolverConfig
    sketch : optional
        Overrides ``config.sketch``; any object with a ``draw(rng)`` method
        returning a sketch state (e.g. :class:`~sketchsolve.sketches.CoordinateSketch`).
    w0 : array_like, optional
        Warm start. The initial residual is recomputed exactly.
    callback : callable, optional
        Called as ``callback(k, w)`` after iteration ``k`` (``w`` must not be
        modified).

    Returns
    -------
    SolveReport

    Raises
    ------
    DivergenceError
        If the relative residual becomes non-finite or exceeds ``1e8``.
    """
    schedule = MomentumSchedule("none", step_size=config.step_size)
    return _heavy_ball(problem, config, schedule, sketch, w0, callback, "sketch-project")


def solve_momentum(problem, config, schedule, *, sketch=None, w0=None, callback=None):
    """Sketch-and-project with heavy-ball momentum.

    With ``(gamma_k, beta_k)`` from ``schedule`` and ``w^{-1} = w^0``::

        w^{k+1} = (1 + beta_k) w^k - beta_k w^{k-1} - gamma_k S_k delta_k
        r^{k+1} = (1 + beta_k) r^k - beta_k r^{k-1} - gamma_k A S_k delta_k

    Other parameters are as in :func:`solve_sketch_project`.
    """
    return _heavy_ball(problem, config, schedule, sketch, w0, callback, f"momentum-{schedule.variant}")


def _heavy_ball(problem, config, schedule, sketch, w0, callback, method):
    A, b, w, r = _setup(problem, w0)
    sample = make_sampler(sketch if sketch is not None else config.sketch, b.size)
    norm0 = float(np.linalg.norm(r))
    rec = _Recorder(method, norm0, config.tol)
    if norm0 == 0.0:
        return rec.report(w, True, r)
    rng = _rng(config.seed)
    w_prev, r_prev = w.copy(), r.copy()
    steps = schedule.steps()
    rel = 1.0
    k = 0
    while k < config.max_iter and not rec.done(rel):
        gamma, beta = next(steps)[:2]
        state = sample(rng)
        out = state.sketch(A, r)
        delta = least_norm_solution(out.SAS, out.rs)
        asd = out.AS_dot(delta)
        if beta == 0.0:
            np.copyto(w_prev, w)
            np.copyto(r_prev, r)
            state.add_to(w, delta, -gamma)
            r -= gamma * asd
        else:
            w_new = (1.0 + beta) * w - beta * w_prev
            state.add_to(w_new, delta, -gamma)
            r_new = (1.0 + beta) * r - beta * r_prev
            r_new -= gamma * asd
            w_prev, w = w, w_new
            r_prev, r = r, r_new
        k += 1
        if _should_refresh(config, k):
            r = _matvec(A, w) - b
            rec.refreshed.append(k)
        rel = rec.record(float(np.linalg.norm(r)))
        rec.check(rel, w if np.all(np.isfinite(w)) else w_prev)
        if callback is not None:
            callback(k, w)
    return rec.report(w, rec.done(rel), r)


def solve_momentum_averaging_form(problem, config, eta_sequence, *, sketch=None, w0=None, callback=None):
    """Momentum in its iterate-averaging form.

    With ``zeta_0 = 0``, ``zeta_k = (1/eta_k) sum_{t<k} eta_t (1 - eta_t)`` and
    ``z^{-1} = w^0``::

        z^k     = z^{k-1} - eta_k S_k delta_k
        w^{k+1} = (1 - c_k) w^k + c_k z^k,    c_k = 1 / (zeta_{k+1} + 1)

    This generates the same iterates as :func:`solve_momentum` with the
    ``theoretical`` schedule built from the same ``eta`` sequence.

    Parameters
    ----------
    eta_sequence : float, sequence or callable
        ``eta_k`` in ``(0, 1]``; a sequence must hold at least
        ``max_iter + 1`` entries.
    """
    A, b, w, r = _setup(problem, w0)
    sample = make_sampler(sketch if sketch is not None else config.sketch, b.size)
    norm0 = float(np.linalg.norm(r))
    rec = _Recorder("momentum-averaging", norm0, config.tol)
    if norm0 == 0.0:
        return rec.report(w, True, r)
    rng = _rng(config.seed)
    z, rz = w.copy(), r.copy()
    steps = averaging_steps(eta_function(eta_sequence))
    rel = 1.0
    k = 0
    while k < config.max_iter and not rec.done(rel):
        step = next(steps)
        state = sample(rng)
        out = state.sketch(A, r)
        delta = least_norm_solution(out.SAS, out.rs)
        state.add_to(z, delta, -step.eta)
        rz -= step.eta * out.AS_dot(delta)
        c = 1.0 / (step.zeta_next + 1.0)
        w_prev = w
        w = (1.0 - c) * w + c * z
        r = (1.0 - c) * r + c * rz
        k += 1
        if _should_refresh(config, k):
            r = _matvec(A, w) - b
            rz = _matvec(A, z) - b
            rec.refreshed.append(k)
        rel = rec.record(float(np.linalg.norm(r)))
        rec.check(rel, w if np.all(np.isfinite(w)) else w_prev)
        if callback is not None:
            callback(k, w)
    return rec.report(w, rec.done(rel), r)


def solve_accelerated(problem, config, accel, *, sketch=None, w0=None, callback=None):
    """Accelerated sketch-and-project with parameters ``(mu, nu)``.

    With ``beta = 1 - sqrt(mu/nu)``, ``gamma = sqrt(1/(mu nu))`` and
    ``alpha = 1 / (1 + sqrt(nu/mu))``, starting from ``w^0 = v^0``::

        z^k     = alpha v^k + (1 - alpha) w^k
        g^k     = S_k delta_k,   delta_k the least-norm solution of
                  (S_k^T A S_k) delta = S_k^T (A z^k - b)
        w^{k+1} = z^k - g^k
        v^{k+1} = beta v^k + (1 - beta) z^k - gamma g^k

    The residuals of ``z``, ``w`` and ``v`` are all maintained by recurrences;
    stopping uses the residual of ``v``. ``mu = nu = 1`` reproduces plain
    sketch-and-project.
    """
    if not isinstance(accel, AccelParams):
        accel = AccelParams(*accel)
    if not accel.is_feasible:
        raise InputError(f"need 0 < mu <= 1/nu <= 1, got mu={accel.mu}, nu={accel.nu}")
    alpha, beta, gamma = accel.coefficients
    A, b, w, r = _setup(problem, w0)
    sample = make_sampler(sketch if sketch is not None else config.sketch, b.size)
    v, rv = w.copy(), r.copy()
    rw = r
    norm0 = float(np.linalg.norm(rv))
    rec = _Recorder("accelerated", norm0, config.tol)
    if norm0 == 0.0:
        return rec.report(w, True, r)
    rng = _rng(config.seed)
    rel = 1.0
    k = 0
    while k < config.max_iter and not rec.done(rel):
        z = alpha * v + (1.0 - alpha) * w
        rz = alpha * rv + (1.0 - alpha) * rw
        state = sample(rng)
        out = state.sketch(A, rz)
        delta = least_norm_solution(out.SAS, out.rs)
        ag = out.AS_dot(delta)
        w_prev = w
        w = state.add_to(z.copy(), delta, -1.0)
        rw = rz - ag
        v = beta * v + (1.0 - beta) * z
        state.add_to(v, delta, -gamma)
        rv = beta * rv + (1.0 - beta) * rz - gamma * ag
        k += 1
        if _should_refresh(config, k):
            rw = _matvec(A, w) - b
            rv = _matvec(A, v) - b
            rec.refreshed.append(k)
        rel = rec.record(float(np.linalg.norm(rv)))
        rec.check(rel, w if np.all(np.isfinite(w)) else w_prev)
        if callback is not None:
            callback(k, w)
    return rec.report(w, rec.done(rel), rw)


def coordinate_sampler(A):
    """Coordinate sketch distribution ``P(e_i) = A_ii / trace(A)``."""
    return CoordinateSketch(A)


def solve_cd_momentum(problem, config, schedule, *, w0=None, callback=None):
    """Coordinate descent with momentum.

    Samples ``i`` with probability ``A_ii / trace(A)`` and updates::

        w^{k+1} = w^k - gamma_k (A_i: w^k - b_i) / A_ii e_i + beta_k (w^k - w^{k-1})

    This is :func:`solve_momentum` specialized to single-coordinate sketches;
    the random draws are identical to passing a
    :class:`~sketchsolve.sketches.CoordinateSketch` to that function.
    ``config.sketch`` is ignored.
    """
    A, b, w, r = _setup(problem, w0)
    sampler = CoordinateSketch(A)
    diag = np.asarray(A.diagonal(), dtype=np.float64)
    sparse = is_sparse(A)
    norm0 = float(np.linalg.norm(r))
    rec = _Recorder(f"cd-momentum-{schedule.variant}", norm0, config.tol)
    if norm0 == 0.0:
        return rec.report(w, True, r)
    rng = _rng(config.seed)
    w_prev, r_prev = w.copy(), r.copy()
    steps = schedule.steps()
    rel = 1.0
    k = 0
    while k < config.max_iter and not rec.done(rel):
        gamma, beta = next(steps)[:2]
        i = int(sampler.sample(rng))
        delta = r[i] / diag[i]
        if beta == 0.0:
            np.copyto(w_prev, w)
            np.copyto(r_prev, r)
            w_new, r_new = w, r
        else:
            w_new = (1.0 + beta) * w - beta * w_prev
            r_new = (1.0 + beta) * r - beta * r_prev
            w_prev, r_prev = w, r
        w_new[i] += -gamma * delta
        if sparse:
            lo, hi = A.indptr[i], A.indptr[i + 1]
            r_new[A.indices[lo:hi]] -= gamma * (A.data[lo:hi] * delta)
        else:
            r_new -= gamma * (A[i] * delta)
        w, r = w_new, r_new
        k += 1
        if _should_refresh(config, k):
            r = _matvec(A, w) - b
            rec.refreshed.append(k)
        rel = rec.record(float(np.linalg.norm(r)))
        rec.check(rel, w if np.all(np.isfinite(w)) else w_prev)
        if callback is not None:
            callback(k, w)
    return rec.report(w, rec.done(rel), r)


def solve_cg(problem, config, *, w0=None, callback=None):
    """Conjugate gradients on ``A w = b`` with the shared stopping rule."""
    A, b, w, r = _setup(problem, w0)
    norm0 = float(np.linalg.norm(r))
    rec = _Recorder("cg", norm0, config.tol)
    if norm0 == 0.0:
        return rec.report(w, True, r)
    # r here is A w - b; CG works with the negative residual
    g = -r
    p = g.copy()
    gg = float(g @ g)
    rel = 1.0
    k = 0
    while k < config.max_iter and not rec.done(rel):
        Ap = _matvec(A, p)
        pAp = float(p @ Ap)
        if pAp <= 0.0:
            break
        step = gg / pAp
        w_prev = w
        w = w + step * p
        g -= step * Ap
        gg_new = float(g @ g)
        p = g + (gg_new / gg) * p
        gg = gg_new
        k += 1
        if _should_refresh(config, k):
            g = b - _matvec(A, w)
            gg = float(g @ g)
            rec.refreshed.append(k)
        rel = rec.record(np.sqrt(gg))
        rec.check(rel, w if np.all(np.isfinite(w)) else w_prev)
        if callback is not None:
            callback(k, w)
    return rec.report(w, rec.done(rel), -g)


def solve_direct(problem):
    """Solve ``A w = b`` by a dense Cholesky factorization.

    Falls back to a least-squares solve when ``A`` is numerically singular
    (e.g. a kernel system with duplicated points and ``lam = 0``).
    """
    A = to_dense(problem.A)
    b = as_vector(problem.b, "b")
    try:
        return scipy.linalg.solve(A, b, assume_a="pos", check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        return scipy.linalg.lstsq(A, b, check_finite=False)[0]


def averaged_residuals(problem, iterates):
    """Residual norms ``||A wbar^t - b||`` of the running means of ``iterates``.

    ``wbar^t`` is the plain mean of ``w^0, ..., w^t``; used to check the
    average-iterate guarantee of the step-size ``gamma < 1`` regime.
    """
    W = np.asarray(iterates, dtype=np.float64)
    means = np.cumsum(W, axis=0) / np.arange(1, W.shape[0] + 1)[:, None]
    R = np.asarray(problem.A @ means.T).T - problem.b
    return np.linalg.norm(R, axis=1)
