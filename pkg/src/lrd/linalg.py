"""Dense matrix primitives.

SVD with a numeric-rank policy, top-r truncation, spectral energy sums, and
the two projector families everything else is built from: entry projections
onto an observation support and orthogonal projections onto the tangent
space of the rank-r manifold at a given matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .rng import Rng

DEFAULT_RANK_TOL = 1e-10


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return a 2-D float64 array; NaN/Inf are rejected."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {m.shape}")
    if m.size and not np.isfinite(m).all():
        raise ValueError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """Thin SVD ``M = U diag(sigma) V^T`` with a numeric rank attached.

    ``numeric_rank`` counts singular values above ``rank_tol * sigma[0]``.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    numeric_rank: int

    @property
    def condition_number(self) -> float:
        """sigma_1 / sigma_rank over the numeric rank; NaN for a zero matrix."""
        if self.numeric_rank == 0:
            return float("nan")
        return float(self.sigma[0] / self.sigma[self.numeric_rank - 1])

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T

    def truncate(self, r: int) -> np.ndarray:
        return (self.u[:, :r] * self.sigma[:r]) @ self.v[:, :r].T


def svd(m, rank_tol: float = DEFAULT_RANK_TOL) -> SvdFactors:
    """Thin SVD of a dense matrix.

    Args:
        m: matrix to factor.
        rank_tol: relative cutoff; sigma_i counts toward the numeric rank
            iff sigma_i > rank_tol * sigma_1.

    Raises:
        NumericalError: if the underlying factorization does not converge.
    """
    m = as_matrix(m)
    if rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed to converge: {exc}") from exc
    top = s[0] if s.size else 0.0
    rank = int(np.count_nonzero(s > rank_tol * top)) if top > 0 else 0
    return SvdFactors(u=u, sigma=s, v=vt.T, numeric_rank=rank)


def svd_r(m, r: int) -> np.ndarray:
    """Best rank-r approximation (top-r truncated SVD)."""
    m = as_matrix(m)
    _check_r(r, m.shape)
    return svd(m).truncate(r)


def schatten_r_sq(m, r: int) -> float:
    """Sum of the r largest squared singular values."""
    m = as_matrix(m)
    _check_r(r, m.shape)
    s = svd(m).sigma
    return float(np.sum(s[:r] ** 2))


def _check_r(r: int, shape) -> None:
    if not 1 <= r <= min(shape):
        raise ValueError(f"r={r} out of range for shape {shape}")


# ---------------------------------------------------------------------------
# observation supports


@dataclass(frozen=True, eq=False)
class SupportSet:
    """A set of observed (row, col) positions, sorted row-major, no duplicates."""

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self):
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise ValueError("support dimensions must be positive")
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if rows.shape != cols.shape or rows.ndim != 1:
            raise ValueError("rows and cols must be 1-D arrays of equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.n_rows:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.n_cols:
                raise ValueError("column index out of range")
        flat = rows * self.n_cols + cols
        if flat.size and np.any(np.diff(flat) <= 0):
            raise ValueError("support indices must be strictly sorted and unique")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def m(self) -> int:
        return int(self.rows.size)

    @property
    def density(self) -> float:
        return self.m / (self.n_rows * self.n_cols)

    @classmethod
    def from_flat(cls, n_rows: int, n_cols: int, flat) -> "SupportSet":
        flat = np.unique(np.asarray(flat, dtype=np.int64))
        return cls(n_rows, n_cols, flat // n_cols, flat % n_cols)

    @classmethod
    def from_pairs(cls, n_rows: int, n_cols: int, pairs) -> "SupportSet":
        pairs = np.atleast_2d(np.asarray(pairs, dtype=np.int64))
        if pairs.size == 0:
            return cls(n_rows, n_cols, np.empty(0, np.int64), np.empty(0, np.int64))
        flat = pairs[:, 0] * n_cols + pairs[:, 1]
        if np.unique(flat).size != flat.size:
            raise ValueError("duplicate support entries")
        order = np.argsort(flat)
        return cls(n_rows, n_cols, pairs[order, 0], pairs[order, 1])

    @classmethod
    def from_mask(cls, mask) -> "SupportSet":
        mask = np.asarray(mask, dtype=bool)
        rows, cols = np.nonzero(mask)
        return cls(mask.shape[0], mask.shape[1], rows, cols)

    @classmethod
    def full(cls, n_rows: int, n_cols: int) -> "SupportSet":
        return cls.from_mask(np.ones((n_rows, n_cols), dtype=bool))

    def mask(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def complement(self) -> "SupportSet":
        return SupportSet.from_mask(~self.mask())


def project_omega(support: SupportSet, m, complement: bool = False) -> np.ndarray:
    """Zero out entries off the support (or on it, when complement=True)."""
    m = as_matrix(m)
    if m.shape != (support.n_rows, support.n_cols):
        raise ValueError(f"matrix shape {m.shape} does not match support "
                         f"({support.n_rows}, {support.n_cols})")
    mask = support.mask()
    if complement:
        mask = ~mask
    return np.where(mask, m, 0.0)


# ---------------------------------------------------------------------------
# tangent spaces


@dataclass(frozen=True, eq=False)
class TangentSpace:
    """Tangent space of the rank-r manifold at U diag(s) V^T.

    Spanned by ``{U X^T + Y V^T}``; U (n1 x r) and V (n2 x r) have
    orthonormal columns.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name, q in (("u", self.u), ("v", self.v)):
            q = as_matrix(q, name)
            # r = 0 (zero matrix) is a legal, empty tangent space
            if q.shape[1]:
                gram = q.T @ q
                if np.max(np.abs(gram - np.eye(q.shape[1]))) > 1e-8:
                    raise ValueError(f"{name} columns are not orthonormal")
            object.__setattr__(self, name, q)
        if self.u.shape[1] != self.v.shape[1]:
            raise ValueError("u and v must have the same number of columns")

    @property
    def r(self) -> int:
        return self.u.shape[1]

    @property
    def dim(self) -> int:
        n1, n2 = self.u.shape[0], self.v.shape[0]
        return self.r * (n1 + n2 - self.r)

    @classmethod
    def from_matrix(cls, m, r: int, rank_tol: float = DEFAULT_RANK_TOL) -> "TangentSpace":
        m = as_matrix(m)
        _check_r(r, m.shape)
        f = svd(m, rank_tol)
        if f.numeric_rank < r:
            raise ValueError(f"matrix has numeric rank {f.numeric_rank} < r={r}")
        return cls(u=f.u[:, :r], v=f.v[:, :r])


def project_T(space: TangentSpace, m) -> np.ndarray:
    """P_T(M) = U U^T M + M V V^T - U U^T M V V^T."""
    m = as_matrix(m)
    u, v = space.u, space.v
    utm = u.T @ m
    mv = m @ v
    return u @ utm + (mv - u @ (utm @ v)) @ v.T


def project_T_perp(space: TangentSpace, m) -> np.ndarray:
    """Complement projection; P_T + P_T_perp is the identity exactly."""
    m = as_matrix(m)
    return m - project_T(space, m)


def composed_projector_norm(space: TangentSpace, support: SupportSet,
                            which: str = "omega", iters: int = 200,
                            seed: int = 0) -> float:
    """Power-iteration estimate of ||P_Omega P_T|| (or ||P_Omega_perp P_T||).

    Runs on the self-adjoint composition P_T P_Omega P_T from a seeded random
    unit start, so the Rayleigh estimate is monotonically non-decreasing in
    ``iters`` and never exceeds 1 (up to roundoff).  A value of 1 means some
    tangent direction is invisible to the observations.
    """
    if which not in ("omega", "omega_perp"):
        raise ValueError("which must be 'omega' or 'omega_perp'")
    if iters < 1:
        raise ValueError("iters must be positive")
    comp = which == "omega_perp"
    mask = support.mask()
    if comp:
        mask = ~mask
    x = Rng(seed).normals((support.n_rows, support.n_cols))
    x = project_T(space, x)
    nx = np.linalg.norm(x)
    if nx == 0:
        return 0.0
    x /= nx
    est = 0.0
    for _ in range(iters):
        bx = project_T(space, np.where(mask, x, 0.0))
        est = float(np.sqrt(max(np.sum(x * bx), 0.0)))
        nbx = np.linalg.norm(bx)
        if nbx == 0:
            return 0.0
        x = bx / nbx
    return est
