"""The top-r spectral penalty, its scaled conjugate, and both proximal maps.

Write ``topr_sq(M) = sum of the r largest squared singular values``.  The
regularizer at the center of the bi-dual solvers is its scaled conjugate

    rstar_norm(X, r) = max_M  <M, X> - topr_sq(M) / 2,

which equals ``|X|_F^2 / 2`` whenever rank(X) <= r and grows like a squared
dual norm otherwise.  By von Neumann's trace inequality every computation
reduces to the spectrum, where the maximizer (and the prox of the penalty)
has a water-filling structure: a leading block shrinks (or keeps) the input
singular values and a trailing block ties at a common level spanning the
r-th position.  Both reductions below enumerate every admissible tie block
and keep the feasible candidate with the best objective; the enumeration is
O(n^2) with prefix sums, which is exact and cheap at dense-solver scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, svd, _check_r

# Selftest hook: when set, the vector prox flips the sign of its output,
# which must make every downstream consistency suite fail loudly.
_inject_sign_fault = False


@dataclass(frozen=True, eq=False)
class SpectralProxResult:
    """Outcome of the vector prox on a descending spectrum.

    ``tie_group`` is ``(first, last, level)`` with 0-based inclusive indices
    when at least two entries tie at a common level (the block always spans
    position r-1); ``None`` when the solution has no genuine tie.
    """

    shrunk_spectrum: np.ndarray
    tie_group: tuple[int, int, float] | None
    objective_value: float


def _validate_spectrum(s: np.ndarray) -> None:
    if s.ndim != 1 or s.size == 0:
        raise ValueError("spectrum must be a nonempty 1-D array")
    if not np.isfinite(s).all():
        raise ValueError("spectrum contains non-finite entries")
    if np.any(s < 0):
        raise ValueError("spectrum entries must be nonnegative")
    if np.any(np.diff(s) > 0):
        raise ValueError("spectrum must be nonincreasing")


def prox_topr_sq_vec(s, r: int, gamma: float) -> SpectralProxResult:
    """Prox of ``x -> (gamma/2) * sum of the r largest x_i^2`` at a spectrum.

    Args:
        s: nonincreasing nonnegative spectrum.
        r: how many leading entries are penalized, 1 <= r <= len(s).
        gamma: positive prox weight.

    Returns:
        SpectralProxResult whose ``shrunk_spectrum`` solves
        ``argmin_x 0.5*|x - s|^2 + (gamma/2)*sum_{i<=r} x_[i]^2`` over
        nonincreasing nonnegative x.  Entries left of the tie block shrink
        by 1/(1+gamma), entries right of it are untouched, and the block
        ties at ``sum(s[first..last]) / (len + gamma * penalized)``.
    """
    s = np.asarray(s, dtype=np.float64)
    _validate_spectrum(s)
    n = s.size
    if not 1 <= r <= n:
        raise ValueError(f"r={r} out of range for spectrum of length {n}")
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive and finite")

    shrink = 1.0 / (1.0 + gamma)
    s1 = np.concatenate(([0.0], np.cumsum(s)))
    s2 = np.concatenate(([0.0], np.cumsum(s * s)))

    first = np.arange(r)[:, None]          # tie block start (0-based)
    last = np.arange(r - 1, n)[None, :]    # tie block end, inclusive
    length = last - first + 1
    penalized = r - first                  # block entries subject to the penalty
    t = (s1[last + 1] - s1[first]) / (length + gamma * penalized)

    tol = 1e-12 * max(1.0, float(s[0]))
    left_edge = np.concatenate(([np.inf], s * shrink))[first]      # s[first-1]*shrink
    right_edge = np.concatenate((s, [-np.inf]))[last + 1]          # s[last+1]
    feasible = (left_edge >= t - tol) & (t >= right_edge - tol)

    # objective via prefix sums: shrunk head + tie block (tail is free)
    head = s2[first] * (gamma / (2.0 * (1.0 + gamma)))
    blk_s1 = s1[last + 1] - s1[first]
    blk_s2 = s2[last + 1] - s2[first]
    block = 0.5 * (length * t * t - 2.0 * t * blk_s1 + blk_s2) \
        + 0.5 * gamma * penalized * t * t
    objective = np.where(feasible, head + block, np.inf)

    flat = int(np.argmin(objective))
    obj_best = float(objective.flat[flat])
    ki, li = np.unravel_index(flat, objective.shape)
    k0, l0 = int(first[ki, 0]), int(last[0, li])
    t_best = float((s1[l0 + 1] - s1[k0]) / ((l0 - k0 + 1) + gamma * (r - k0)))

    x = s.copy()
    x[:k0] *= shrink
    x[k0:l0 + 1] = t_best
    if _inject_sign_fault:
        x = -x
    tie = (k0, l0, t_best) if l0 > k0 else None
    return SpectralProxResult(shrunk_spectrum=x, tie_group=tie,
                              objective_value=obj_best)


def rstar_spectrum_maximizer(sigma, r: int) -> np.ndarray:
    """Spectrum of the matrix achieving ``rstar_norm``'s defining maximum.

    For a nonincreasing spectrum sigma, the maximizer keeps sigma_i on a
    leading block and ties everything from some index ``k < r`` onward at
    ``sum(sigma[k:]) / (r - k)``; the feasible k with the largest objective
    wins.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    _validate_spectrum(sigma)
    n = sigma.size
    if not 1 <= r <= n:
        raise ValueError(f"r={r} out of range for spectrum of length {n}")
    k0, _ = _conjugate_best_block(sigma, r)
    t = float(np.sum(sigma[k0:]) / (r - k0))
    y = sigma.copy()
    y[k0:] = t
    return y


def _conjugate_best_block(sigma: np.ndarray, r: int) -> tuple[int, float]:
    """Best tie-block start and value of the conjugate maximization."""
    n = sigma.size
    tol = 1e-12 * max(1.0, float(sigma[0]))
    tail = np.cumsum(sigma[::-1])[::-1]                  # tail[k] = sum sigma[k:]
    head2 = np.concatenate(([0.0], np.cumsum(sigma * sigma)))
    best_k, best_v = 0, -np.inf
    for k in range(r):
        t = tail[k] / (r - k)
        if k > 0 and sigma[k - 1] < t - tol:
            continue
        value = 0.5 * head2[k] + t * tail[k] - 0.5 * (r - k) * t * t
        if value > best_v:
            best_k, best_v = k, value
    return best_k, best_v


def rstar_norm(m, r: int) -> float:
    """Scaled conjugate of the top-r spectral energy.

    ``rstar_norm(M, r) = max_X <M, X> - 0.5 * schatten_r_sq(X, r)``; equals
    ``0.5 * |M|_F^2`` whenever rank(M) <= r.  Nonnegative, nonincreasing
    in r.
    """
    m = as_matrix(m)
    _check_r(r, m.shape)
    sigma = svd(m).sigma
    if sigma[0] == 0.0:
        return 0.0
    _, value = _conjugate_best_block(sigma, r)
    return float(value)


def prox_half_r_sq(m, r: int, gamma: float) -> np.ndarray:
    """Prox of ``gamma * 0.5 * schatten_r_sq(., r)`` at a matrix.

    Lifts the vector prox through the SVD: singular vectors are kept, the
    spectrum is replaced by ``prox_topr_sq_vec``'s solution.
    """
    m = as_matrix(m)
    _check_r(r, m.shape)
    f = svd(m)
    x = prox_topr_sq_vec(f.sigma, r, gamma).shrunk_spectrum
    return (f.u * x) @ f.v.T


def prox_rstar(m, r: int, gamma: float) -> np.ndarray:
    """Prox of ``gamma * rstar_norm(., r)`` via Moreau decomposition.

    ``prox_{gamma f*}(M) = M - gamma * prox_{f/gamma}(M / gamma)`` with
    ``f = 0.5 * schatten_r_sq``; the two prox outputs recompose to M up to
    roundoff (checked by the identity tests).
    """
    m = as_matrix(m)
    _check_r(r, m.shape)
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive and finite")
    return m - gamma * prox_half_r_sq(m / gamma, r, 1.0 / gamma)


def rstar_subgradient_check(x_star, g, r: int, tol: float = 1e-8):
    """Membership test for the subdifferential of ``rstar_norm(., r)`` at X*.

    For rank(X*) = r the subdifferential is ``{X* + W : U^T W = 0, W V = 0,
    |W| <= sigma_r(X*)}``.  Returns ``(ok, margins)`` where margins carry the
    three raw residuals (row-space leak, column-space leak, spectral excess).

    Raises:
        ValueError: if the numeric rank of X* differs from r.
    """
    x_star = as_matrix(x_star, "x_star")
    g = as_matrix(g, "g")
    if g.shape != x_star.shape:
        raise ValueError("g and x_star must have the same shape")
    _check_r(r, x_star.shape)
    f = svd(x_star)
    if f.numeric_rank != r:
        raise ValueError(f"x_star has numeric rank {f.numeric_rank}, expected {r}")
    u, v = f.u[:, :r], f.v[:, :r]
    w = g - x_star
    row_leak = float(np.max(np.abs(u.T @ w))) if w.size else 0.0
    col_leak = float(np.max(np.abs(w @ v))) if w.size else 0.0
    spectral = float(np.linalg.norm(w, 2))
    sigma_r = float(f.sigma[r - 1])
    margins = {
        "row_space_leak": row_leak,
        "col_space_leak": col_leak,
        "spectral_excess": spectral - sigma_r,
    }
    ok = row_leak <= tol and col_leak <= tol and spectral <= sigma_r + tol
    return ok, margins
