import numpy as np
import pytest

from covts.estimators import (default_floor, frob_err, kernel_cov,
                              kernel_smooth_path, kernel_weights,
                              positive_definitize, sample_cov, spectral_err,
                              threshold)
from covts.linalg import eigh_sym, jacobi_eigh, spectral_radius_power, symmetrize
from covts.processes import CovPath, ProcessSpec, simulate


def random_sym(rng, p):
    a = rng.standard_normal((p, p))
    return (a + a.T) / 2


# ---------------------------------------------------------------------- #
# sample covariance


def test_sample_cov_single_column_outer_product():
    z = np.array([[1.0], [2.0], [-3.0]])
    assert np.array_equal(sample_cov(z), z @ z.T)


def test_sample_cov_two_columns():
    z = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(sample_cov(z), 0.5 * np.eye(2))


def test_sample_cov_psd_and_symmetric():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((8, 5))  # rank deficient: p > n
    s = sample_cov(z)
    assert np.max(np.abs(s - s.T)) == 0.0
    assert np.linalg.eigvalsh(s)[0] >= -1e-10


def test_sample_cov_center_flag():
    rng = np.random.default_rng(1)
    z = rng.standard_normal((3, 50)) + 5.0
    centered = sample_cov(z, center=True)
    zc = z - z.mean(axis=1, keepdims=True)
    assert np.allclose(centered, zc @ zc.T / 50, atol=1e-12)


# ---------------------------------------------------------------------- #
# hard thresholding


def test_threshold_zero_level_is_identity():
    rng = np.random.default_rng(2)
    s = random_sym(rng, 6)
    est = threshold(s, 0.0)
    assert np.array_equal(est.matrix, s)
    assert est.kept == 36


def test_threshold_hand_example():
    s = np.array([[1.0, 0.3], [0.3, 1.0]])
    est = threshold(s, 0.5)
    assert np.array_equal(est.matrix, np.eye(2))
    assert est.kept == 2


def test_threshold_above_max_zeroes_everything():
    rng = np.random.default_rng(3)
    s = random_sym(rng, 5)
    est = threshold(s, np.max(np.abs(s)) + 1.0)
    assert np.all(est.matrix == 0.0)
    assert est.kept == 0


def test_threshold_idempotent_and_permutation_equivariant():
    rng = np.random.default_rng(4)
    for _ in range(100):
        p = int(rng.integers(2, 10))
        s = random_sym(rng, p)
        u = float(rng.uniform(0, 1.5))
        est = threshold(s, u)
        again = threshold(est.matrix, u)
        assert np.array_equal(again.matrix, est.matrix)
        assert again.kept == est.kept
        perm = rng.permutation(p)
        pmat = np.eye(p)[perm]
        direct = threshold(symmetrize(pmat @ s @ pmat.T), u).matrix
        assert np.array_equal(direct, pmat @ est.matrix @ pmat.T)


def test_threshold_kept_matches_bruteforce():
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = int(rng.integers(2, 9))
        s = random_sym(rng, p)
        u = float(rng.uniform(0, 1.5))
        est = threshold(s, u)
        count = sum(1 for j in range(p) for k in range(p)
                    if abs(s[j, k]) >= u)
        assert est.kept == count


def test_threshold_rejects_negative_level():
    with pytest.raises(ValueError):
        threshold(np.eye(2), -0.1)


# ---------------------------------------------------------------------- #
# positive-definitization


def test_positive_definitize_diagonal_example():
    out = positive_definitize(np.diag([2.0, -1.0]), 0.5)
    assert np.allclose(out, np.diag([2.0, 0.5]), atol=1e-12)


def test_positive_definitize_noop_when_floor_inactive():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((5, 5))
    t = a @ a.T + 0.6 * np.eye(5)
    out = positive_definitize(t, 0.5)
    assert np.sqrt(np.sum((out - t) ** 2)) <= 1e-10


def test_positive_definitize_floor_and_inequality():
    rng = np.random.default_rng(7)
    for _ in range(100):
        p = int(rng.integers(2, 10))
        t = random_sym(rng, p)
        a = rng.standard_normal((p, p))
        sigma = a @ a.T  # PSD truth, as in the covariance setting
        v = float(rng.uniform(0.05, 1.0))
        out = positive_definitize(t, v)
        assert np.linalg.eigvalsh(out)[0] >= v - 1e-10
        lhs = np.sum((out - sigma) ** 2)
        rhs = 6.0 * np.sum((t - sigma) ** 2) + 4.0 * p * v * v
        assert lhs <= rhs * (1 + 1e-12)


def test_positive_definitize_rejects_nonpositive_floor():
    with pytest.raises(ValueError):
        positive_definitize(np.eye(2), 0.0)


def test_default_floor_formula():
    est = threshold(np.array([[1.0, 0.6], [0.6, 1.0]]), 0.5)
    assert est.kept == 4
    assert default_floor(est) == pytest.approx(0.5 * np.sqrt(4 / 2))


# ---------------------------------------------------------------------- #
# kernel weights and smoothing


def test_kernel_weights_singleton_window():
    kw = kernel_weights(100, 0.37, 0.004)
    assert kw.w[36] == 1.0
    assert np.sum(kw.w != 0.0) == 1


def test_kernel_weights_normalized():
    for scheme in ("nadaraya_watson", "local_linear"):
        kw = kernel_weights(250, 0.41, 0.07, scheme=scheme)
        assert abs(np.sum(kw.w) - 1.0) <= 1e-12


def test_nw_weights_nonnegative_with_compact_support():
    kw = kernel_weights(200, 0.5, 0.05)
    assert np.all(kw.w >= 0.0)
    grid = np.arange(1, 201) / 200
    assert np.all(kw.w[np.abs(0.5 - grid) > 0.05] == 0.0)


def test_local_linear_first_moment_zero():
    n = 180
    kw = kernel_weights(n, 0.04, 0.08, scheme="local_linear")  # boundary t
    grid = np.arange(1, n + 1) / n
    assert abs(np.sum(kw.w * (0.04 - grid))) <= 1e-12


def test_kernel_weights_rejects_empty_window_and_bad_args():
    with pytest.raises(ValueError):
        kernel_weights(10, 0.55, 0.01)  # no grid point within b
    with pytest.raises(ValueError):
        kernel_weights(10, 1.5, 0.2)
    with pytest.raises(ValueError):
        kernel_weights(10, 0.5, 0.0)
    with pytest.raises(ValueError):
        kernel_weights(10, 0.5, 0.2, scheme="nearest")
    with pytest.raises(ValueError):
        kernel_weights(10, 0.5, 0.2, kernel="tricube")


def test_flat_kernel_full_window_recovers_sample_cov():
    rng = np.random.default_rng(8)
    z = rng.standard_normal((4, 60))
    s = kernel_cov(z, 0.5, 0.6, kernel="flat")
    assert np.allclose(s, sample_cov(z), atol=1e-12)


def test_kernel_cov_nw_positive_semidefinite():
    rng = np.random.default_rng(9)
    z = rng.standard_normal((6, 300))
    s = kernel_cov(z, 0.3, 0.1)
    assert np.linalg.eigvalsh(s)[0] >= -1e-10


def test_kernel_cov_boundary_still_defined():
    rng = np.random.default_rng(10)
    z = rng.standard_normal((3, 100))
    for scheme in ("nadaraya_watson", "local_linear"):
        s = kernel_cov(z, 0.01, 0.1, scheme=scheme)
        assert np.all(np.isfinite(s))


def test_kernel_smooth_path_bias_slope_two():
    # noiseless inputs Sigma(m/n): interior smoothing error scales like b^2
    n = 4000
    tgrid = np.arange(1, n + 1) / n
    mats = (1 + 0.5 * np.sin(2 * np.pi * tgrid))[:, None, None] * np.eye(2)
    target = (1 + 0.5 * np.sin(2 * np.pi * 0.25)) * np.eye(2)
    bs = np.exp(np.linspace(np.log(0.02), np.log(0.2), 6))
    errs = [np.max(np.abs(kernel_smooth_path(mats, 0.25, b) - target))
            for b in bs]
    slope = np.polyfit(np.log(bs), np.log(errs), 1)[0]
    assert abs(slope - 2.0) <= 0.3


def test_kernel_cov_tracks_modulated_variance():
    base = ProcessSpec.var1(0.0, p=10, seed=33, burn_in=0)
    spec = ProcessSpec.modulated(base, CovPath.scale(np.eye(10), 1.0, 1.0))
    z = simulate(spec, 5000)
    s = kernel_cov(z, 0.5, 5000 ** -0.2)
    assert abs(np.mean(np.diag(s)) - 1.5) <= 0.15


# ---------------------------------------------------------------------- #
# error norms


def test_error_norm_hand_values():
    a = np.diag([3.0, -4.0])
    b = np.zeros((2, 2))
    assert frob_err(a, b) == pytest.approx(6.25)
    assert spectral_err(a, b) == pytest.approx(4.0)
    assert frob_err(a, a) == 0.0
    assert spectral_err(a, a) == 0.0


def test_error_norms_reject_mismatch():
    with pytest.raises(ValueError):
        frob_err(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        spectral_err(np.eye(2), np.eye(3))


def test_spectral_err_sanity_bounds():
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = int(rng.integers(2, 10))
        a, b = random_sym(rng, p), random_sym(rng, p)
        rho = spectral_err(a, b)
        diff = a - b
        assert rho <= p * np.max(np.abs(diff)) + 1e-12
        assert rho >= np.max(np.abs(np.diag(diff))) - 1e-12


# ---------------------------------------------------------------------- #
# eigensolvers


def test_jacobi_matches_lapack():
    rng = np.random.default_rng(12)
    for p in (2, 5, 12, 25):
        m = random_sym(rng, p)
        w_j, q_j = jacobi_eigh(m)
        w_l, _ = eigh_sym(m)
        assert np.max(np.abs(w_j - w_l)) <= 1e-10
        assert np.max(np.abs(q_j @ np.diag(w_j) @ q_j.T - m)) <= 1e-10
        assert np.max(np.abs(q_j.T @ q_j - np.eye(p))) <= 1e-12


def test_jacobi_known_eigenvalues():
    m = np.array([[2.0, 1.0], [1.0, 2.0]])
    w, _ = jacobi_eigh(m)
    assert np.allclose(w, [1.0, 3.0], atol=1e-12)


def test_spectral_radius_power_iteration():
    a = np.array([[0.5, 0.4], [0.0, 0.3]])
    assert abs(spectral_radius_power(a) - 0.5) <= 1e-6
    rot = 0.9 * np.array([[0.0, -1.0], [1.0, 0.0]])  # complex pair
    assert abs(spectral_radius_power(rot) - 0.9) <= 1e-6
