"""Independent verification oracles used by the test suite.

The graphical-lasso oracle minimizes the penalized objective by exhaustive
grid search over the free parameters of a symmetric 2x2 or 3x3 matrix, with
pattern-search refinement: the box re-centers on the grid argmin and
shrinks, except that a dimension whose argmin sits on the box boundary is
re-centered without shrinking so a narrow valley cannot be cut off.  It
shares no code with the production solver.
"""

import numpy as np


def _objective2(s, lam, d0, d1, a, penalize_diagonal):
    det = d0 * d1 - a * a
    valid = (d0 > 0) & (det > 0)
    tr = s[0, 0] * d0 + s[1, 1] * d1 + 2.0 * s[0, 1] * a
    pen = 2.0 * np.abs(a)
    if penalize_diagonal:
        pen = pen + np.abs(d0) + np.abs(d1)
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = tr - np.log(np.where(valid, det, 1.0)) + lam * pen
    return np.where(valid, obj, np.inf)


def _objective3(s, lam, d0, d1, d2, a, b, c, penalize_diagonal):
    det = (d0 * (d1 * d2 - c * c) - a * (a * d2 - b * c)
           + b * (a * c - d1 * b))
    minor2 = d0 * d1 - a * a
    valid = (d0 > 0) & (minor2 > 0) & (det > 0)
    tr = (s[0, 0] * d0 + s[1, 1] * d1 + s[2, 2] * d2
          + 2.0 * (s[0, 1] * a + s[0, 2] * b + s[1, 2] * c))
    pen = 2.0 * (np.abs(a) + np.abs(b) + np.abs(c))
    if penalize_diagonal:
        pen = pen + np.abs(d0) + np.abs(d1) + np.abs(d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        obj = tr - np.log(np.where(valid, det, 1.0)) + lam * pen
    return np.where(valid, obj, np.inf)


def glasso_grid_oracle(s, lam, penalize_diagonal=True, points=6,
                       max_passes=120, resolution=2e-6):
    """Brute-force grid minimizer of the penalized log-det objective.

    Supports p in {2, 3}.  Returns the symmetric matrix assembled from the
    best grid point once every grid step is below ``resolution``.
    """
    s = np.asarray(s, dtype=float)
    p = s.shape[0]
    if p not in (2, 3):
        raise ValueError("grid oracle supports p = 2 or 3 only")
    inv = np.linalg.inv(s + 1e-10 * np.eye(p))
    if p == 2:
        center = np.array([inv[0, 0], inv[1, 1], inv[0, 1]])
        n_diag = 2
    else:
        center = np.array([inv[0, 0], inv[1, 1], inv[2, 2],
                           inv[0, 1], inv[0, 2], inv[1, 2]])
        n_diag = 3
    width = 2.0 * max(1.0, float(np.max(np.abs(inv))))
    lo, hi = center - width, center + width
    lo[:n_diag] = np.maximum(lo[:n_diag], 1e-8)
    dims = center.size
    best = center.copy()
    for _ in range(max_passes):
        axes = [np.linspace(lo[i], hi[i], points) for i in range(dims)]
        grids = np.meshgrid(*axes, indexing="ij")
        if p == 2:
            vals = _objective2(s, lam, grids[0], grids[1], grids[2],
                               penalize_diagonal)
        else:
            vals = _objective3(s, lam, grids[0], grids[1], grids[2],
                               grids[3], grids[4], grids[5],
                               penalize_diagonal)
        k = np.unravel_index(np.argmin(vals), vals.shape)
        best = np.array([axes[i][k[i]] for i in range(dims)])
        steps = (hi - lo) / (points - 1)
        new_lo, new_hi = np.empty(dims), np.empty(dims)
        for i in range(dims):
            if k[i] == 0 or k[i] == points - 1:
                # argmin on the box edge: re-center without shrinking so a
                # narrow valley cannot escape the search region
                w = hi[i] - lo[i]
                new_lo[i], new_hi[i] = best[i] - w, best[i] + w
            else:
                new_lo[i] = best[i] - 2.0 * steps[i]
                new_hi[i] = best[i] + 2.0 * steps[i]
        lo, hi = new_lo, new_hi
        lo[:n_diag] = np.maximum(lo[:n_diag], 1e-12)
        if np.max(steps) < resolution:
            break
    if p == 2:
        return np.array([[best[0], best[2]], [best[2], best[1]]])
    return np.array([[best[0], best[3], best[4]],
                     [best[3], best[1], best[5]],
                     [best[4], best[5], best[2]]])


def random_pd_matrix(rng, p, eig_range=(0.4, 2.5)):
    """Random positive-definite matrix with controlled conditioning.

    Random orthogonal rotation of eigenvalues drawn uniformly from
    ``eig_range``; the bounded condition number keeps both the production
    solver and the grid oracle on their fast, reliable paths.
    """
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    w = rng.uniform(*eig_range, size=p)
    m = (q * w) @ q.T
    return (m + m.T) / 2.0
