"""Ground-truth covariance models and entrywise smallness measures.

Builders for spatially structured covariance matrices (rational quadratic
and gamma-exponential kernels over planar sites), the sparse-vs-thresholdable
counterexample matrix, membership tests for the polynomial/logarithmic tail
classes and the strong l^q-ball, and the smallness functionals that drive
the convergence-rate machinery.

Matrices are plain symmetric ``numpy`` arrays; CSV and binary round-trip
helpers are at the bottom of the module.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .linalg import check_symmetric, eigh_sym, symmetrize
from .rng import make_generator

_BIN_MAGIC = b"COVTSM1\x00"


@dataclass(frozen=True)
class SiteSet:
    """Planar observation sites with pairwise Euclidean distances."""

    coords: tuple  # p pairs of (x, y)

    def __post_init__(self):
        arr = self.array()
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("coords must be p pairs of planar coordinates")
        if not np.all(np.isfinite(arr)):
            raise ValueError("site coordinates must be finite")

    @property
    def p(self) -> int:
        return len(self.coords)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)

    def distances(self) -> np.ndarray:
        """Symmetric p x p Euclidean distance matrix (exact zero diagonal)."""
        xy = self.array()
        diff = xy[:, np.newaxis, :] - xy[np.newaxis, :, :]
        d = np.sqrt(np.sum(diff ** 2, axis=-1))
        np.fill_diagonal(d, 0.0)
        return symmetrize(d)


def uniform_sites(p: int, side: float, seed: int) -> SiteSet:
    """``p`` iid uniform sites on the square ``[0, side]^2``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if side <= 0:
        raise ValueError("side must be positive")
    rng = make_generator(seed)
    xy = rng.uniform(0.0, side, size=(p, 2))
    return SiteSet(coords=tuple(map(tuple, xy)))


def rational_quadratic_cov(sites: SiteSet, K: float, tau: float) -> np.ndarray:
    """Rational quadratic covariance ``(1 + d^2/(K tau^2))^(-K/2)`` over sites.

    ``K`` controls the polynomial decay of spatial correlation and ``tau``
    the characteristic length scale.  Unit diagonal, entries in (0, 1].
    """
    if K <= 0:
        raise ValueError("smoothness parameter K must be positive")
    if tau <= 0:
        raise ValueError("length scale tau must be positive")
    d = sites.distances()
    sigma = (1.0 + d ** 2 / (K * tau ** 2)) ** (-K / 2.0)
    np.fill_diagonal(sigma, 1.0)
    return symmetrize(sigma)


def gamma_exponential_cov(sites: SiteSet, tau: float, theta: float) -> np.ndarray:
    """Gamma-exponential covariance ``exp(-(d/tau)^theta)``, theta in (0, 2].

    ``theta = 2`` specializes to the squared-exponential kernel.
    """
    if tau <= 0:
        raise ValueError("length scale tau must be positive")
    if not 0 < theta <= 2:
        raise ValueError("exponent theta must lie in (0, 2]")
    d = sites.distances()
    sigma = np.exp(-(d / tau) ** theta)
    np.fill_diagonal(sigma, 1.0)
    return symmetrize(sigma)


def counterexample_matrix(p: int, eps: float) -> np.ndarray:
    """Unit-diagonal matrix with a single dense first row/column of ``eps``.

    Positive definite exactly when ``0 < eps <= (p-1)^(-1/2)``; its minimum
    eigenvalue is ``1 - eps * sqrt(p-1)``.  The matrix has O(p) entries above
    any threshold yet its first column defeats column-sum sparsity classes.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    bound = (p - 1) ** (-0.5)
    if not 0 < eps <= bound:
        raise ValueError(f"eps must lie in (0, {bound:.6g}] for p={p}")
    sigma = np.eye(p)
    sigma[0, 1:] = eps
    sigma[1:, 0] = eps
    return sigma


@dataclass(frozen=True)
class SmallnessReport:
    """Entrywise smallness measures of a symmetric matrix at threshold u.

    Attributes
    ----------
    u : threshold level
    D : averaged ``min(u^2, sigma_jk^2)`` (normalized Frobenius bias proxy)
    F : fraction of entries with ``|sigma_jk| >= u`` (tail empirical process)
    D_star : ``max_k sum_j min(|sigma_jk|, u)`` (spectral bias proxy)
    N_star : ``max_k #{j : |sigma_jk| >= u}`` (worst column occupancy)
    D_prec : averaged ``u * min(u, |sigma_jk|)`` (precision-matrix variant)
    D_minus : ``D_prec`` excluding the diagonal
    """

    u: float
    D: float
    F: float
    D_star: float
    N_star: int
    D_prec: float
    D_minus: float


def smallness(sigma: np.ndarray, u: float) -> SmallnessReport:
    """Exact entrywise scan of all six smallness measures at level ``u``."""
    sigma = check_symmetric(sigma, "sigma")
    if u < 0:
        raise ValueError("threshold u must be >= 0")
    p = sigma.shape[0]
    a = np.abs(sigma)
    d = float(np.mean(np.minimum(u * u, sigma ** 2)))
    f = float(np.mean(a >= u))
    clipped = np.minimum(a, u)
    d_star = float(np.max(np.sum(clipped, axis=0)))
    n_star = int(np.max(np.sum(a >= u, axis=0)))
    d_prec = float(u * np.mean(clipped))
    off = clipped.copy()
    np.fill_diagonal(off, 0.0)
    d_minus = float(u * np.sum(off) / (p * p))
    return SmallnessReport(u=float(u), D=d, F=f, D_star=d_star,
                           N_star=n_star, D_prec=d_prec, D_minus=d_minus)


def _membership_grid(a: np.ndarray) -> np.ndarray:
    """Thresholds where the counting function can jump, within (0, 1].

    The count ``#{|sigma_jk| >= u}`` is piecewise constant with jumps only
    at entry magnitudes, so checking at all distinct magnitudes (plus a
    dyadic backbone down to the smallest nonzero magnitude) is exact.
    """
    vals = np.unique(a[a > 0])
    lo = vals[0] if vals.size else 1.0
    dyadic = []
    u = 1.0
    while u >= lo:
        dyadic.append(u)
        u /= 2.0
    grid = np.unique(np.concatenate([vals[vals <= 1.0], np.array(dyadic)]))
    return grid


def class_membership(sigma: np.ndarray, r: float, M: float, kind: str) -> bool:
    """Test membership in a tail-decay covariance class.

    Parameters
    ----------
    sigma : symmetric matrix with ``max_j sigma_jj <= 1`` required
        (checked; a violation returns False rather than raising).
    r, M : class parameters.
    kind : one of
        ``"H_r"``: total entry count ``#{|sigma_jk| >= u} <= M u^(-r)``
        for all u in (0, 1], with 0 <= r < 2;
        ``"L_r"``: count bounded by ``M log^r(2 + 1/u)``, r > 0;
        ``"strong_lq"``: column sums ``max_k sum_j |sigma_jk|^r <= M``,
        0 <= r < 1 (r = 0 counts nonzeros per column).
    """
    sigma = check_symmetric(sigma, "sigma")
    a = np.abs(sigma)
    if kind == "strong_lq":
        if not 0 <= r < 1:
            raise ValueError("strong_lq requires 0 <= r < 1")
        if np.max(np.diag(sigma)) > 1.0:
            return False
        if r == 0:
            col = np.sum(a > 0, axis=0)  # 0^0 convention: count nonzeros
        else:
            col = np.sum(a ** r, axis=0)
        return bool(np.max(col) <= M)
    if kind == "H_r":
        if not 0 <= r < 2:
            raise ValueError("H_r requires 0 <= r < 2")
        budget = lambda u: M * u ** (-r)
    elif kind == "L_r":
        if r <= 0:
            raise ValueError("L_r requires r > 0")
        budget = lambda u: M * np.log(2.0 + 1.0 / u) ** r
    else:
        raise ValueError(f"unknown class kind {kind!r}")
    if np.max(np.diag(sigma)) > 1.0:
        return False
    for u in _membership_grid(a):
        if np.sum(a >= u) > budget(u):
            return False
    return True


def theta_bound_linear(gamma: float, m: int) -> float:
    """Tail sum ``sum_{l >= m} (l+1)^(-1-gamma)`` of the linear-decay family.

    Bounds (up to the moment constant) the cumulative dependence of the
    built-in moving-average process beyond lag ``m``; used to label
    experiments with their effective decay exponent.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if m < 0:
        raise ValueError("lag m must be >= 0")
    # sum_{l>=m} (l+1)^(-s) = Hurwitz zeta(s, m+1)
    return float(zeta(1.0 + gamma, m + 1.0))


def precision_from_cov(sigma: np.ndarray, min_eig: float = 1e-10) -> np.ndarray:
    """Exact-inverse precision matrix via reciprocal eigenvalues.

    Keeps ground-truth (covariance, precision) pairs consistent for the
    penalized-likelihood experiments.  Rejects inputs with eigenvalues at
    or below ``min_eig``.
    """
    sigma = check_symmetric(sigma, "sigma")
    w, q = eigh_sym(sigma)
    if w[0] <= min_eig:
        raise ValueError(f"covariance nearly singular (min eigenvalue "
                         f"{w[0]:.3e} <= {min_eig:.1e})")
    return symmetrize((q / w) @ q.T)


# ---------------------------------------------------------------------- #
# serialization


def save_matrix_csv(path, sigma: np.ndarray) -> None:
    """Write a matrix as row-major CSV with a ``# p=<dim>`` header line."""
    sigma = np.asarray(sigma, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# p={sigma.shape[0]}\n")
        for row in sigma:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# p="):
            raise ValueError(f"{path}: missing matrix header")
        p = int(first.strip().split("=", 1)[1])
        rows = [list(map(float, line.strip().split(",")))
                for line in fh if line.strip()]
    a = np.array(rows, dtype=float)
    if a.shape[0] != p:
        raise ValueError(f"{path}: expected {p} rows, found {a.shape[0]}")
    return a


def save_matrix_binary(path, sigma: np.ndarray) -> None:
    """Compact binary form: magic, uint32 dimension, float64 lower triangle."""
    sigma = check_symmetric(sigma, "sigma")
    p = sigma.shape[0]
    tril = sigma[np.tril_indices(p)]
    with open(path, "wb") as fh:
        fh.write(_BIN_MAGIC)
        fh.write(struct.pack("<I", p))
        fh.write(tril.astype("<f8").tobytes())


def load_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(_BIN_MAGIC))
        if magic != _BIN_MAGIC:
            raise ValueError(f"{path}: bad magic; not a covts matrix file")
        (p,) = struct.unpack("<I", fh.read(4))
        data = np.frombuffer(fh.read(8 * p * (p + 1) // 2), dtype="<f8")
    if data.size != p * (p + 1) // 2:
        raise ValueError(f"{path}: truncated payload")
    sigma = np.zeros((p, p))
    sigma[np.tril_indices(p)] = data
    sigma = sigma + np.tril(sigma, -1).T
    return sigma


def save_data_csv(path, z: np.ndarray) -> None:
    """Write a p x n data matrix as CSV (one row per coordinate)."""
    z = np.asarray(z, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# p={z.shape[0]} n={z.shape[1]}\n")
        for row in z:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_data_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# p="):
            raise ValueError(f"{path}: missing data header")
        parts = dict(tok.split("=") for tok in first[2:].strip().split())
        p, n = int(parts["p"]), int(parts["n"])
        rows = [list(map(float, line.strip().split(",")))
                for line in fh if line.strip()]
    z = np.array(rows, dtype=float)
    if z.shape != (p, n):
        raise ValueError(f"{path}: expected shape ({p},{n}), got {z.shape}")
    return z
