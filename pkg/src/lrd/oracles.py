"""Reference implementations used to verify the fast paths.

Everything here recomputes a quantity by a route independent of the formula
it checks: isotonic-projected gradient descent for the vector prox,
matrix-space subgradient ascent for the conjugate value, plain gradient
descent on the lifted objectives, and dense eigendecompositions for
composed projector norms.  These are deliberately slow and simple; the test
suite and the CLI selftest compare them against the closed forms.
"""

from __future__ import annotations

import numpy as np

from .linalg import SupportSet, TangentSpace, as_matrix, project_T, svd_r


def pava_nonincreasing(z: np.ndarray) -> np.ndarray:
    """Isotonic regression onto nonincreasing sequences (pool adjacent violators)."""
    z = np.asarray(z, dtype=np.float64)
    sums = []
    counts = []
    for value in z:
        sums.append(float(value))
        counts.append(1)
        # merge while the running block means increase left to right
        while len(sums) > 1 and sums[-2] * counts[-1] < sums[-1] * counts[-2]:
            sums[-2] += sums[-1]
            counts[-2] += counts[-1]
            sums.pop()
            counts.pop()
    out = np.empty_like(z)
    pos = 0
    for s, c in zip(sums, counts):
        out[pos:pos + c] = s / c
        pos += c
    return out


def project_monotone_nonneg(z: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x : x_1 >= ... >= x_n >= 0}."""
    return np.maximum(pava_nonincreasing(z), 0.0)


def prox_vec_descent(s, r: int, gamma: float, max_iters: int = 100_000,
                     tol: float = 1e-14) -> np.ndarray:
    """Projected gradient solve of the vector prox program.

    Minimizes ``0.5*|x-s|^2 + (gamma/2)*sum_{i<r} x_i^2`` over the
    nonincreasing nonnegative cone, projecting with pool-adjacent-violators
    at every step.  Converges linearly (the objective is smooth and strongly
    convex on the cone), so the iteration cap is rarely reached.
    """
    s = np.asarray(s, dtype=np.float64)
    n = s.size
    step = 1.0 / (1.0 + gamma)
    weight = np.zeros(n)
    weight[:r] = gamma
    x = project_monotone_nonneg(s)
    for _ in range(max_iters):
        grad = (x - s) + weight * x
        x_new = project_monotone_nonneg(x - step * grad)
        if np.max(np.abs(x_new - x)) < tol * max(1.0, float(s[0]) if n else 1.0):
            return x_new
        x = x_new
    return x


def rstar_value_ascent(m, r: int, steps=None, patience: int = 250,
                       min_per_step: int = 300, max_per_step: int = 6000):
    """Subgradient ascent estimate of ``max_X <M, X> - 0.5*topr_sq(X)``.

    Works directly in matrix space: the ascent direction is
    ``M - svd_r(X)`` (a subgradient of the concave objective), run through
    a geometrically decreasing step schedule.  Each phase keeps stepping
    until the best value seen stalls for ``patience`` iterations, so far
    maximizers get covered by the large-step phases; the residual value
    error scales with the final step size.

    Returns:
        (best_value, best_x): the largest objective value seen and the
        iterate achieving it.
    """
    m = as_matrix(m)
    if steps is None:
        steps = tuple(0.5 * 0.5**j for j in range(17))  # down to ~8e-6
    stall_tol = 1e-13 * max(1.0, float(np.sum(m * m)))

    def value_at(x):
        s = np.linalg.svd(x, compute_uv=False)
        return float(np.sum(m * x) - 0.5 * np.sum(s[:r] ** 2))

    x = m.copy()
    best_v, best_x = -np.inf, x.copy()
    for step in steps:
        stalled = 0
        mean = np.zeros_like(x)
        count = 0
        while count < min_per_step or (stalled < patience and count < max_per_step):
            value = value_at(x)
            if value > best_v + stall_tol:
                best_v, best_x, stalled = value, x.copy(), 0
            else:
                stalled += 1
            mean += x
            count += 1
            x = x + step * (m - svd_r(x, r))
        # by concavity the phase average scores at least the average value,
        # and it suppresses the oscillation across tied singular values
        value = value_at(mean / count)
        if value > best_v:
            best_v, best_x = value, mean / count
    return best_v, best_x


def matrix_prox_descent(m, r: int, gamma: float, max_iters: int = 50_000,
                        tol: float = 1e-12) -> np.ndarray:
    """Gradient descent solve of ``min_X 0.5*|X-M|^2 + (gamma/2)*topr_sq(X)``.

    Valid when the minimizer has a spectral gap at position r (no tie), in
    which case the objective is differentiable along the path and the method
    converges linearly.
    """
    m = as_matrix(m)
    x = m / (1.0 + gamma)
    step = 1.0 / (1.0 + gamma)
    for _ in range(max_iters):
        grad = (x - m) + gamma * svd_r(x, r)
        x_new = x - step * grad
        if np.max(np.abs(x_new - x)) < tol:
            return x_new
        x = x_new
    return x


def conjugate_pair_value(x, r: int) -> float:
    """``0.5 * topr_sq(X, r)``, the smooth half of the Fenchel pair."""
    s = np.linalg.svd(as_matrix(x), compute_uv=False)
    return float(0.5 * np.sum(s[:r] ** 2))


def dense_composed_operator(space: TangentSpace, support: SupportSet,
                            which: str = "omega") -> np.ndarray:
    """Dense matrix of the map ``X -> P_Omega(P_T(X))`` on vectorized input.

    Only sensible for small shapes; used to cross-check the power-iteration
    norm estimate against an exact eigendecomposition.
    """
    n1, n2 = support.n_rows, support.n_cols
    mask = support.mask()
    if which == "omega_perp":
        mask = ~mask
    elif which != "omega":
        raise ValueError("which must be 'omega' or 'omega_perp'")
    dim = n1 * n2
    out = np.empty((dim, dim))
    basis = np.zeros((n1, n2))
    for j in range(dim):
        basis.flat[j] = 1.0
        out[:, j] = np.where(mask, project_T(space, basis), 0.0).ravel()
        basis.flat[j] = 0.0
    return out


def composed_norm_dense(space: TangentSpace, support: SupportSet,
                        which: str = "omega") -> float:
    """Exact ||P_Omega P_T|| via dense SVD of the vectorized operator."""
    op = dense_composed_operator(space, support, which)
    return float(np.linalg.norm(op, 2))
