"""Synthetic ground truth: low-rank matrices, sampling models, corruptions.

Everything here is seed-deterministic; instance builders derive independent
sub-streams for each random ingredient so a single seed pins the whole
instance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SupportSet, as_matrix, project_omega, svd, _check_r
from .rng import Rng, derive_seed


@dataclass(frozen=True, eq=False)
class MCInstance:
    x_star: np.ndarray
    a: np.ndarray
    b: np.ndarray
    obs: SupportSet
    obs_values: np.ndarray
    mu: float
    kappa: float
    r: int
    seed: int


@dataclass(frozen=True, eq=False)
class RPCAInstance:
    x_star: np.ndarray
    s_star: np.ndarray
    d: np.ndarray
    corr: SupportSet
    lambda_default: float
    mu: float
    r: int
    seed: int


@dataclass(frozen=True, eq=False)
class BicliqueInstance:
    y: np.ndarray
    w: np.ndarray
    beta: float


def _orthonormal(rng: Rng, n: int, r: int) -> np.ndarray:
    q, rr = np.linalg.qr(rng.normals((n, r)))
    # fix the sign ambiguity so the basis is a pure function of the stream
    return q * np.sign(np.where(np.diag(rr) == 0, 1.0, np.diag(rr)))


def gen_lowrank(n1: int, n2: int, r: int, spectrum, seed: int):
    """Rank-r ground truth with a prescribed spectrum.

    Returns (X_star, A, B) where X* = A @ B, A = U*sqrt(S), B = sqrt(S)*V^T
    with U, V orthonormal bases of seeded Gaussian matrices.
    """
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1 or spectrum.size != r:
        raise ValueError("spectrum must be a length-r vector")
    if np.any(spectrum <= 0) or np.any(np.diff(spectrum) > 0):
        raise ValueError("spectrum must be positive and nonincreasing")
    if not 1 <= r <= min(n1, n2):
        raise ValueError(f"r={r} out of range for shape ({n1}, {n2})")
    rng = Rng(seed)
    u = _orthonormal(rng.spawn(1), n1, r)
    v = _orthonormal(rng.spawn(2), n2, r)
    root = np.sqrt(spectrum)
    a = u * root
    b = (v * root).T
    return a @ b, a, b


def incoherence_mu(x, r: int):
    """Coordinate spread of the top-r singular subspaces.

    mu = max over rows i of n1*|U^T e_i|^2/r and columns j of
    n2*|V^T e_j|^2/r; always in [1, max(n1,n2)/r].  Returns
    (mu, per_row, per_col) with the individual leverage profiles.
    """
    x = as_matrix(x)
    _check_r(r, x.shape)
    f = svd(x)
    if f.numeric_rank < r:
        raise ValueError(f"matrix has numeric rank {f.numeric_rank} < r={r}")
    n1, n2 = x.shape
    per_row = n1 * np.sum(f.u[:, :r] ** 2, axis=1) / r
    per_col = n2 * np.sum(f.v[:, :r] ** 2, axis=1) / r
    mu = float(max(per_row.max(), per_col.max()))
    return mu, per_row, per_col


def rpca_linf_check(x, r: int):
    """Entry-spread condition: |X|_inf against sqrt(mu*r/(n1*n2)) * sigma_r.

    Returns (holds, ratio); holds iff ratio <= 1.
    """
    x = as_matrix(x)
    mu, _, _ = incoherence_mu(x, r)
    n1, n2 = x.shape
    sigma_r = float(svd(x).sigma[r - 1])
    ratio = float(np.abs(x).max() / (np.sqrt(mu * r / (n1 * n2)) * sigma_r))
    return ratio <= 1.0, ratio


def sample_uniform(n1: int, n2: int, m: int, seed: int) -> SupportSet:
    """Exactly m positions, uniform over all m-subsets of the grid."""
    if not 0 <= m <= n1 * n2:
        raise ValueError(f"m={m} out of range for {n1}x{n2}")
    flat = Rng(seed).sample_without_replacement(n1 * n2, m)
    return SupportSet.from_flat(n1, n2, flat)


def sample_bernoulli(n1: int, n2: int, p: float, seed: int) -> SupportSet:
    """Each position included independently with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must lie in [0, 1]")
    keep = Rng(seed).bernoulli(n1 * n2, p)
    return SupportSet.from_flat(n1, n2, np.nonzero(keep)[0])


def gen_sparse_corruption(n1: int, n2: int, m: int, magnitude: float,
                          model: str = "signed_uniform", seed: int = 0):
    """Sparse corruption with fair random signs of a fixed magnitude.

    model "signed_uniform" draws a support of exactly m cells uniformly;
    "bernoulli_sign" draws Ber(m/(n1*n2)) membership, so m is the expected
    size.  Returns (S_star, support).
    """
    if not (np.isfinite(magnitude) and magnitude > 0):
        raise ValueError("magnitude must be positive")
    if model == "signed_uniform":
        support = sample_uniform(n1, n2, m, derive_seed(seed, 1))
    elif model == "bernoulli_sign":
        if not 0 <= m <= n1 * n2:
            raise ValueError(f"m={m} out of range for {n1}x{n2}")
        support = sample_bernoulli(n1, n2, m / (n1 * n2), derive_seed(seed, 1))
    else:
        raise ValueError(f"unknown corruption model: {model!r}")
    signs = Rng(derive_seed(seed, 2)).signs(support.m)
    s_star = np.zeros((n1, n2))
    s_star[support.rows, support.cols] = magnitude * signs
    return s_star, support


def biclique_reduction(edges, beta: float, offweight: float | None = None
                       ) -> BicliqueInstance:
    """Weighted-LRA encoding of the maximum-edge-biclique instance.

    Y is the 0/1 bipartite adjacency; W is 1 on edges and a large constant
    off edges (default max(n1,n2)^2), so any competitive fit must vanish
    exactly where there is no edge.
    """
    y = np.asarray(edges, dtype=np.float64)
    if y.ndim != 2 or not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("edges must be a 2-D 0/1 adjacency matrix")
    if not (np.isfinite(beta) and beta > 0):
        raise ValueError("beta must be positive")
    if offweight is None:
        offweight = float(max(y.shape) ** 2)
    if offweight <= 0:
        raise ValueError("offweight must be positive")
    w = np.where(y == 1.0, 1.0, offweight)
    return BicliqueInstance(y=y, w=w, beta=float(beta))


def required_samples_mc(n1: int, n2: int, r: int, mu: float,
                        kappa: float, c: float = 1.0) -> int:
    """Sample count c * kappa^2 * mu * r * n * ln(n) * log_{2kappa}(n).

    n is the larger dimension; logs are natural with the last factor
    computed as ln(n)/ln(2*kappa).  Monotone in every argument.
    """
    if min(n1, n2, r) < 1 or mu <= 0 or c <= 0:
        raise ValueError("arguments must be positive")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    n = max(n1, n2)
    value = c * kappa**2 * mu * r * n * math.log(n) \
        * (math.log(n) / math.log(2.0 * kappa))
    return math.ceil(value)


def make_mc_instance(n1: int, n2: int, r: int, spectrum, m: int,
                     sampler: str = "uniform", seed: int = 0) -> MCInstance:
    """Ground truth plus an observation set and the observed values."""
    x_star, a, b = gen_lowrank(n1, n2, r, spectrum, derive_seed(seed, 1))
    if sampler == "uniform":
        obs = sample_uniform(n1, n2, m, derive_seed(seed, 2))
    elif sampler == "bernoulli":
        obs = sample_bernoulli(n1, n2, m / (n1 * n2), derive_seed(seed, 2))
    else:
        raise ValueError(f"unknown sampler: {sampler!r}")
    mu, _, _ = incoherence_mu(x_star, r)
    spectrum = np.asarray(spectrum, dtype=np.float64)
    return MCInstance(x_star=x_star, a=a, b=b, obs=obs,
                      obs_values=project_omega(obs, x_star),
                      mu=mu, kappa=float(spectrum[0] / spectrum[r - 1]),
                      r=r, seed=seed)


def make_rpca_instance(n1: int, n2: int, r: int, spectrum, m_corr: int,
                       magnitude: float | None = None,
                       model: str = "signed_uniform",
                       seed: int = 0) -> RPCAInstance:
    """Low-rank plus sparse decomposition target D = X* + S*.

    Corruption magnitude defaults to |X*|_inf so the sparse part is neither
    negligible nor dominant; lambda_default = sigma_r(X*)/sqrt(max(n1,n2)).
    """
    x_star, _, _ = gen_lowrank(n1, n2, r, spectrum, derive_seed(seed, 1))
    if magnitude is None:
        magnitude = float(np.abs(x_star).max())
    s_star, corr = gen_sparse_corruption(n1, n2, m_corr, magnitude, model,
                                         derive_seed(seed, 2))
    mu, _, _ = incoherence_mu(x_star, r)
    spectrum = np.asarray(spectrum, dtype=np.float64)
    return RPCAInstance(x_star=x_star, s_star=s_star, d=x_star + s_star,
                        corr=corr,
                        lambda_default=float(spectrum[r - 1]
                                             / np.sqrt(max(n1, n2))),
                        mu=mu, r=r, seed=seed)
