"""Covariance estimators: sample, hard-thresholded, eigenvalue-floored,
and kernel-smoothed time-varying, plus the matrix error norms used by the
Monte Carlo harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import check_symmetric, eigh_sym, symmetrize

DEFAULT_KERNEL = "epanechnikov"


def sample_cov(z: np.ndarray, center: bool = False) -> np.ndarray:
    """Sample covariance ``n^(-1) sum_i z_i z_i^T`` of a p x n data matrix.

    With ``center=True`` the time-average of the columns is subtracted
    first (plumbing extension; the default matches the mean-zero
    convention of the estimators in this package).
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise ValueError("data matrix must be 2-d (p x n)")
    n = z.shape[1]
    if n < 1:
        raise ValueError("need at least one observation column")
    if center:
        z = z - z.mean(axis=1, keepdims=True)
    return symmetrize(z @ z.T / n)


@dataclass(frozen=True)
class ThresholdEstimate:
    """Hard-thresholded matrix plus the threshold and survivor count."""

    matrix: np.ndarray
    u: float
    kept: int


def threshold(s: np.ndarray, u: float) -> ThresholdEstimate:
    """Entrywise hard threshold: zero out every entry with ``|s_jk| < u``.

    The rule is applied to all entries including the diagonal; ``kept``
    counts surviving entries over the full p x p grid.
    """
    s = check_symmetric(s, "s")
    if u < 0:
        raise ValueError("threshold u must be >= 0")
    keep = np.abs(s) >= u
    out = np.where(keep, s, 0.0)
    return ThresholdEstimate(matrix=out, u=float(u), kept=int(np.sum(keep)))


def default_floor(estimate: ThresholdEstimate) -> float:
    """Suggested eigenvalue floor ``u * sqrt(kept / p)`` for an estimate."""
    p = estimate.matrix.shape[0]
    return float(estimate.u * np.sqrt(estimate.kept / p))


def positive_definitize(t: np.ndarray, v: float) -> np.ndarray:
    """Floor the eigenvalues of a symmetric matrix at ``v > 0``.

    Reconstructs ``sum_j max(lambda_j, v) q_j q_j^T``; the result is
    positive definite with minimum eigenvalue >= v (up to 1e-10 roundoff)
    and unchanged when the floor is inactive.
    """
    t = check_symmetric(t, "t")
    if v <= 0:
        raise ValueError("eigenvalue floor v must be positive")
    w, q = eigh_sym(t)
    if w[0] >= v:
        return t
    return symmetrize((q * np.maximum(w, v)) @ q.T)


# ---------------------------------------------------------------------- #
# kernel smoothing


def _kernel_values(x: np.ndarray, kernel: str) -> np.ndarray:
    if kernel == "epanechnikov":
        return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)
    if kernel == "flat":
        # test-only uniform kernel: exact sample_cov recovery at b >= 1
        return np.where(np.abs(x) <= 1.0, 0.5, 0.0)
    raise ValueError(f"unknown kernel {kernel!r}")


@dataclass(frozen=True)
class KernelWeights:
    """Normalized smoothing weights over the n time points for one t."""

    t: float
    b: float
    scheme: str
    w: np.ndarray


def kernel_weights(n: int, t: float, b: float,
                   scheme: str = "nadaraya_watson",
                   kernel: str = DEFAULT_KERNEL) -> KernelWeights:
    """Kernel smoothing weights ``w_m(t)`` on the grid ``m/n``, m = 1..n.

    Nadaraya-Watson weights are nonnegative and sum to one; local-linear
    weights sum to one with vanishing first local moment, which removes
    the boundary bias at the edges of [0, 1].

    Raises ``ValueError`` when no observation falls in the window
    ``|t - m/n| <= b``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("evaluation time t must lie in [0, 1]")
    if not 0.0 < b < 1.0:
        raise ValueError("bandwidth b must lie in (0, 1)")
    if scheme not in ("nadaraya_watson", "local_linear"):
        raise ValueError(f"unknown smoothing scheme {scheme!r}")
    grid = np.arange(1, n + 1, dtype=float) / n
    d = t - grid
    k = _kernel_values(d / b, kernel)
    if np.sum(k) <= 0.0:
        raise ValueError(f"empty kernel window at t={t}, b={b}, n={n}")
    if scheme == "nadaraya_watson":
        w = k / np.sum(k)
    else:
        s1 = np.sum(k * d)
        s2 = np.sum(k * d * d)
        raw = k * (s2 - d * s1)
        tot = np.sum(raw)
        if tot == 0.0:
            raise ValueError("degenerate local-linear window")
        w = raw / tot
    return KernelWeights(t=float(t), b=float(b), scheme=scheme, w=w)


def kernel_cov(z: np.ndarray, t: float, b: float,
               scheme: str = "nadaraya_watson",
               kernel: str = DEFAULT_KERNEL) -> np.ndarray:
    """Kernel-smoothed covariance ``sum_m w_m(t) z_m z_m^T`` at time ``t``.

    With Nadaraya-Watson weights the result is positive semidefinite.
    Interior points ``t`` in [b, 1-b] carry the standard smoothing bias of
    order b^2; local_linear removes the extra boundary bias outside that
    range.
    """
    z = np.asarray(z, dtype=float)
    kw = kernel_weights(z.shape[1], t, b, scheme=scheme, kernel=kernel)
    return symmetrize((z * kw.w[np.newaxis, :]) @ z.T)


def kernel_smooth_path(matrices, t: float, b: float,
                       scheme: str = "nadaraya_watson",
                       kernel: str = DEFAULT_KERNEL) -> np.ndarray:
    """Kernel-smooth an explicit sequence of matrices ``Sigma(m/n)``.

    Noiseless counterpart of :func:`kernel_cov`: replaces the outer
    products ``z_m z_m^T`` by exact matrix inputs, isolating the smoothing
    bias from sampling noise.
    """
    mats = np.asarray(matrices, dtype=float)
    kw = kernel_weights(mats.shape[0], t, b, scheme=scheme, kernel=kernel)
    return symmetrize(np.einsum("m,mjk->jk", kw.w, mats))


# ---------------------------------------------------------------------- #
# error norms


def frob_err(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized squared Frobenius distance ``|A - B|_F^2 / p^2``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    p = a.shape[0]
    return float(np.sum((a - b) ** 2) / (p * p))


def spectral_err(a: np.ndarray, b: np.ndarray) -> float:
    """Spectral norm of ``A - B`` (largest absolute eigenvalue)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    w = eigh_sym(symmetrize(a - b))[0]
    return float(max(abs(w[0]), abs(w[-1])))
