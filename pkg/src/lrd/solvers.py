"""Convex bi-dual solvers and the factored primal solver.

All convex programs run through one Douglas-Rachford loop; what varies is
the pair of prox operators.  The bi-dual objective is ``rstar_norm`` from
the rstar module, whose prox is closed-form, so each iteration costs one
SVD plus cheap entrywise work.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError
from .linalg import SupportSet, as_matrix, project_omega, schatten_r_sq, svd, svd_r, _check_r
from .rng import Rng
from .rstar import prox_rstar, rstar_norm

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_NUMERICAL = "numerical_failure"


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    tol: float = 1e-9
    gamma: float = 1.0
    seed: int = 0
    log_every: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ValueError("tol must be positive")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Outcome of one solver run.

    ``residual_trace`` holds the relative fixed-point residuals at logged
    iterations (every ``log_every``-th plus the final one).  ``dual_value``
    and ``duality_gap`` are populated only when a certificate was available;
    ``solution_sparse`` only by the robust-PCA solver.
    """

    solution: np.ndarray
    iterations_run: int
    residual_trace: tuple
    primal_value: float
    status: str
    dual_value: float | None = None
    duality_gap: float | None = None
    solution_sparse: np.ndarray | None = None

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED


def douglas_rachford(prox_f, prox_g, z0, cfg: SolverConfig) -> SolveReport:
    """Douglas-Rachford splitting for min f(x) + g(x).

    Iterates ``x = prox_g(z); y = prox_f(2x - z); z <- z + y - x`` and stops
    when the relative change ``|z_new - z|_F / max(1, |z|_F)`` drops to
    ``cfg.tol``.  Returns the last ``x`` (the prox_g-feasible iterate).
    Non-finite iterates or prox failures end the run with a
    ``numerical_failure`` status instead of raising.
    """
    z = as_matrix(z0, "z0").copy()
    x = z
    trace: list[float] = []
    status = STATUS_MAX_ITERS
    it = 0
    for it in range(1, cfg.max_iters + 1):
        try:
            x = prox_g(z)
            y = prox_f(2.0 * x - z)
        except NumericalError:
            status = STATUS_NUMERICAL
            break
        z_new = z + y - x
        if not np.isfinite(z_new).all():
            status = STATUS_NUMERICAL
            break
        res = float(np.linalg.norm(z_new - z) / max(1.0, np.linalg.norm(z)))
        done = res <= cfg.tol
        if done or it % cfg.log_every == 0 or it == cfg.max_iters:
            trace.append(res)
        z = z_new
        if done:
            status = STATUS_CONVERGED
            break
    return SolveReport(solution=x, iterations_run=it,
                       residual_trace=tuple(trace),
                       primal_value=float("nan"), status=status)


def _mc_dual_values(certificate, obs_values, r, primal):
    lam = as_matrix(certificate, "certificate")
    dual = float(-np.sum(lam * obs_values) - 0.5 * schatten_r_sq(lam, r))
    return dual, primal - dual


def solve_mc_bidual(obs: SupportSet, obs_values, r: int,
                    cfg: SolverConfig = SolverConfig(),
                    certificate=None) -> SolveReport:
    """Matrix completion: min rstar_norm(X, r) s.t. X agrees with obs_values on obs.

    ``obs_values`` is a full-shape matrix that must vanish off the support.
    The observation constraint is enforced exactly at every iterate (its
    prox overwrites the observed entries), so the returned solution is
    always feasible.  ``certificate``, when given, is a dual matrix
    supported on obs; it prices the observations and yields dual value
    ``-<Lambda, obs_values> - 0.5 * schatten_r_sq(Lambda, r)``.
    """
    obs_values = as_matrix(obs_values, "obs_values")
    if obs.m == 0:
        raise ValueError("observation support is empty")
    if obs_values.shape != (obs.n_rows, obs.n_cols):
        raise ValueError("obs_values shape does not match support")
    off = project_omega(obs, obs_values, complement=True)
    if np.abs(off).max() > 1e-12 * max(1.0, np.abs(obs_values).max()):
        raise ValueError("obs_values has mass off the observation support")
    _check_r(r, obs_values.shape)

    rows, cols, vals = obs.rows, obs.cols, obs_values[obs.rows, obs.cols]

    def prox_g(z):
        out = z.copy()
        out[rows, cols] = vals
        return out

    report = douglas_rachford(lambda m: prox_rstar(m, r, cfg.gamma),
                              prox_g, obs_values, cfg)
    primal = rstar_norm(report.solution, r) \
        if report.status != STATUS_NUMERICAL else float("nan")
    report = replace(report, primal_value=primal)
    if certificate is not None and np.isfinite(primal):
        dual, gap = _mc_dual_values(certificate, obs_values, r, primal)
        report = replace(report, dual_value=dual, duality_gap=gap)
    return report


def solve_rpca_bidual(d, r: int, lam: float,
                      cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Robust PCA: min rstar_norm(X, r) + lam * |D - X|_1.

    The l1 prox moves each entry of the iterate toward D by at most
    ``gamma * lam`` (elementwise soft threshold on the residual).  Returns
    the low-rank part as ``solution`` and ``solution_sparse = D - X_hat``,
    so the decomposition identity is exact by construction.
    """
    d = as_matrix(d, "d")
    _check_r(r, d.shape)
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError("lambda must be positive")
    shift = cfg.gamma * lam

    def prox_g(z):
        return z + np.clip(d - z, -shift, shift)

    report = douglas_rachford(lambda m: prox_rstar(m, r, cfg.gamma),
                              prox_g, d, cfg)
    x_hat = report.solution
    s_hat = d - x_hat
    primal = rstar_norm(x_hat, r) + lam * float(np.abs(s_hat).sum()) \
        if report.status != STATUS_NUMERICAL else float("nan")
    return replace(report, primal_value=primal, solution_sparse=s_hat)


def solve_weighted_lra(y, w, beta: float, r: int,
                       cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Weighted low-rank fit: min rstar_norm(M, r) + beta * sum w_ij^2 (y_ij - m_ij)^2.

    The quadratic prox is separable:
    ``m <- (m + 2*gamma*beta*w^2*y) / (1 + 2*gamma*beta*w^2)``.
    """
    y = as_matrix(y, "y")
    w = as_matrix(w, "w")
    if w.shape != y.shape:
        raise ValueError("w and y must have the same shape")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError("beta must be positive")
    _check_r(r, y.shape)
    wsq = 2.0 * cfg.gamma * beta * w * w

    def prox_g(z):
        return (z + wsq * y) / (1.0 + wsq)

    report = douglas_rachford(lambda m: prox_rstar(m, r, cfg.gamma),
                              prox_g, y, cfg)
    m_hat = report.solution
    primal = rstar_norm(m_hat, r) \
        + beta * float(np.sum((w * (y - m_hat)) ** 2)) \
        if report.status != STATUS_NUMERICAL else float("nan")
    return replace(report, primal_value=primal)


def solve_factored_gd(y_hat, r: int,
                      cfg: SolverConfig = SolverConfig()):
    """Gradient descent on the factored fit f(A,B) = 0.5 * |Y - AB|_F^2.

    Backtracking line search (sufficient-decrease constant 1e-4, halving,
    with 1.5x growth after accepted steps) keeps the objective monotone.
    Initial factors are seeded Gaussians scaled so |A0 B0|_F is on the
    order of sigma_1(Y).  Stops when the joint gradient norm reaches
    ``cfg.tol``.  Returns (A, B, report); the report's solution is AB and
    its residual_trace logs gradient norms.
    """
    y_hat = as_matrix(y_hat, "y_hat")
    _check_r(r, y_hat.shape)
    n1, n2 = y_hat.shape
    s1 = float(svd(y_hat).sigma[0])
    scale = np.sqrt(s1 / np.sqrt(n1 * n2)) if s1 > 0 else 1.0
    rng = Rng(cfg.seed)
    a = rng.normals((n1, r)) * scale
    b = rng.normals((r, n2)) * scale

    def objective(a, b):
        return 0.5 * float(np.linalg.norm(y_hat - a @ b) ** 2)

    f = objective(a, b)
    step = 1.0 / max(s1, 1.0)
    trace: list[float] = []
    status = STATUS_MAX_ITERS
    it = 0
    for it in range(1, cfg.max_iters + 1):
        misfit = a @ b - y_hat
        grad_a = misfit @ b.T
        grad_b = a.T @ misfit
        gnorm = float(np.sqrt(np.sum(grad_a**2) + np.sum(grad_b**2)))
        done = gnorm <= cfg.tol
        if done or it % cfg.log_every == 0 or it == cfg.max_iters:
            trace.append(gnorm)
        if done:
            status = STATUS_CONVERGED
            break
        while True:
            a_new = a - step * grad_a
            b_new = b - step * grad_b
            f_new = objective(a_new, b_new)
            if f_new <= f - 1e-4 * step * gnorm**2:
                break
            step *= 0.5
            if step < 1e-20:   # line search exhausted at a stationary point
                break
        if step < 1e-20:
            break
        a, b, f = a_new, b_new, f_new
        step *= 1.5
        if not np.isfinite(f):
            status = STATUS_NUMERICAL
            break
    report = SolveReport(solution=a @ b, iterations_run=it,
                         residual_trace=tuple(trace), primal_value=f,
                         status=status)
    return a, b, report


@dataclass(frozen=True, eq=False)
class GapReport:
    """Primal/dual objective pair for a factored point and a dual matrix.

    ``primal_value`` is the factored objective 0.5*|AB|_F^2 (the data term
    vanishes on feasible points); ``dual_value`` prices the observations;
    ``truncation_residual`` is |AB - svd_r(-Lambda)|_F, which the strong
    duality relation drives to zero; ``bidual_value`` is rstar_norm of the
    convex solution passed alongside; ``feasibility_residual`` is
    |P_Omega(AB) - obs_values|_F.
    """

    primal_value: float
    dual_value: float
    duality_gap: float
    truncation_residual: float
    bidual_value: float
    feasibility_residual: float


def duality_gap_mc(x_hat, a, b, lam, obs: SupportSet, obs_values,
                   r: int, support_tol: float = 1e-8) -> GapReport:
    """Evaluate the completion duality gap at a factored point (A, B).

    ``lam`` must be supported on obs (within ``support_tol``, checked);
    the factored point's observation misfit is reported, not enforced.
    """
    x_hat = as_matrix(x_hat, "x_hat")
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    lam = as_matrix(lam, "lam")
    obs_values = as_matrix(obs_values, "obs_values")
    _check_r(r, x_hat.shape)
    off = float(np.linalg.norm(project_omega(obs, lam, complement=True)))
    if off > support_tol * (1.0 + float(np.linalg.norm(lam))):
        raise ValueError(f"certificate has mass {off:.3e} off the support")
    ab = a @ b
    primal = 0.5 * float(np.sum(ab * ab))
    dual = float(-np.sum(lam * obs_values) - 0.5 * schatten_r_sq(lam, r))
    return GapReport(
        primal_value=primal,
        dual_value=dual,
        duality_gap=primal - dual,
        truncation_residual=float(np.linalg.norm(ab - svd_r(-lam, r))),
        bidual_value=rstar_norm(x_hat, r),
        feasibility_residual=float(
            np.linalg.norm(project_omega(obs, ab) - obs_values)),
    )


def check_factored_stationarity(a, b, lam, tol: float = 1e-8):
    """First-order optimality of a factored point against a dual matrix.

    A stationary pair satisfies ``(AB + Lambda) B^T = 0`` and
    ``A^T (AB + Lambda) = 0``.  Returns ``(ok, residuals)`` with the two
    Frobenius residuals; ok iff both are at most ``tol * (1 + |AB|_F)``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    lam = as_matrix(lam, "lam")
    slack = a @ b + lam
    residuals = {
        "left": float(np.linalg.norm(slack @ b.T)),
        "right": float(np.linalg.norm(a.T @ slack)),
    }
    bound = tol * (1.0 + float(np.linalg.norm(a @ b)))
    ok = residuals["left"] <= bound and residuals["right"] <= bound
    return ok, residuals
