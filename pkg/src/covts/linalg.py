"""Symmetric-matrix helpers and eigensolvers.

`eigh_sym` is the production eigensolver (LAPACK via ``numpy.linalg.eigh``).
`jacobi_eigh` is a self-contained cyclic Jacobi implementation kept as an
independent reference; the test suite cross-checks the two on random inputs.
"""

from __future__ import annotations

import numpy as np


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Return ``(a + a.T) / 2``, which is exactly symmetric entrywise."""
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


def check_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate that ``a`` is a square, finite, exactly symmetric 2-d array."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    if a.shape[0] > 0 and np.max(np.abs(a - a.T)) != 0.0:
        raise ValueError(f"{name} is not symmetric; use symmetrize() first")
    return a


def eigh_sym(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns
    -------
    (w, q) : tuple of ndarray
        Eigenvalues in ascending order and the orthonormal eigenvector
        matrix with ``a = q @ diag(w) @ q.T``.
    """
    a = np.asarray(a, dtype=float)
    w, q = np.linalg.eigh(a)
    return w, q


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12,
                max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps row pairs until every off-diagonal entry is below ``tol`` in
    absolute value.  Accurate and dependency-free, but O(p^3) per sweep with
    Python-level loop overhead, so it is reserved for verification and small
    problems; use :func:`eigh_sym` in production paths.

    Parameters
    ----------
    a : ndarray
        Symmetric matrix.
    tol : float
        Absolute off-diagonal convergence threshold.
    max_sweeps : int
        Safety cap on the number of full sweeps.

    Returns
    -------
    (w, q) : tuple of ndarray
        Eigenvalues ascending, orthonormal eigenvectors in columns.
    """
    a = check_symmetric(a, "a").copy()
    p = a.shape[0]
    q = np.eye(p)
    if p < 2:
        return np.diag(a).copy(), q
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a))).max()
        if off <= tol:
            break
        for j in range(p - 1):
            for k in range(j + 1, p):
                ajk = a[j, k]
                if abs(ajk) <= tol:
                    continue
                # classical Givens rotation zeroing a[j, k]
                theta = 0.5 * (a[k, k] - a[j, j]) / ajk
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rowj = a[j, :].copy()
                rowk = a[k, :].copy()
                a[j, :] = c * rowj - s * rowk
                a[k, :] = s * rowj + c * rowk
                colj = a[:, j].copy()
                colk = a[:, k].copy()
                a[:, j] = c * colj - s * colk
                a[:, k] = s * colj + c * colk
                a[j, k] = 0.0
                a[k, j] = 0.0
                qj = q[:, j].copy()
                qk = q[:, k].copy()
                q[:, j] = c * qj - s * qk
                q[:, k] = s * qj + c * qk
    else:
        raise RuntimeError(f"Jacobi sweep limit {max_sweeps} reached "
                           f"(off-diagonal {off:.3e} > tol {tol:.1e})")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], q[:, order]


def spectral_radius_power(a: np.ndarray, iters: int = 400,
                          seed: int = 12345) -> float:
    """Spectral radius of a (possibly nonsymmetric) matrix by power iteration.

    Uses the Gelfand-style estimate ``exp(mean log ||A v_k||)`` over
    renormalized iterates, which also converges for complex dominant
    eigenvalue pairs where the plain Rayleigh ratio oscillates.  Used for
    the stationarity check of autoregressive transition matrices.
    """
    a = np.asarray(a, dtype=float)
    p = a.shape[0]
    if p == 0:
        return 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal(p)
    v /= np.linalg.norm(v)
    # discard early transient, average log growth over the remaining steps
    burn = iters // 4
    logsum = 0.0
    count = 0
    for k in range(iters):
        w = a @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        if k >= burn:
            logsum += np.log(nw)
            count += 1
        v = w / nw
    return float(np.exp(logsum / count))
