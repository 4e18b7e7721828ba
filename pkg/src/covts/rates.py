"""Convergence-rate functions, threshold-equation solvers and regime
classification for thresholded covariance estimation under temporal
dependence.

The moment order ``q`` and the dependence-decay exponent ``alpha`` place a
profile in one of three regimes split at ``alpha = 1/2 - 1/q``: above the
boundary the tail function ``H`` and Gaussian-type function ``G`` match the
independent-data rates, at the boundary both pick up logarithmic factors,
and below it the deviation inequalities weaken to the exponents collected
in ``beta_tilde``.  All otherwise-unspecified constants are set to one and
surfaced as profile multipliers; consumers should compare slopes, orderings
and ratio bands rather than absolute levels.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Rational
from typing import Callable, Optional, Union

import numpy as np

from .covmodels import smallness

BOUNDARY_TOL = 1e-12


class NoSignChange(ValueError):
    """The two equation sides do not cross on the supplied interval."""


class NonMonotone(ValueError):
    """Bracketing check failed: the side difference changes sign more
    than once on the interval, so bisection is not well posed."""


@dataclass(frozen=True)
class RateProfile:
    """Bundle (n, p, q, alpha, bandwidth) driving all rate evaluations.

    ``c_g`` multiplies the argument of G inside the risk bounds (the
    unit-constant stand-in for the existential constant there); ``c_h``
    scales H the same way.
    """

    n: float
    p: int
    q: float
    alpha: float
    b: Optional[float] = None
    c_g: float = 1.0
    c_h: float = 1.0

    def __post_init__(self):
        if self.n <= 1:
            raise ValueError("sample size n must exceed 1")
        if self.p < 1:
            raise ValueError("dimension p must be >= 1")
        if float(self.q) <= 2:
            raise ValueError("moment order q must exceed 2")
        if float(self.alpha) <= 0:
            raise ValueError("dependence exponent alpha must be positive")
        if self.b is not None and not 0 < self.b <= 1:
            raise ValueError("bandwidth b must lie in (0, 1]")

    @property
    def boundary(self) -> float:
        """Phase-transition location ``1/2 - 1/q``."""
        return 0.5 - 1.0 / float(self.q)

    @property
    def regime(self) -> str:
        """``weak``, ``boundary`` or ``strong`` by the sign of
        ``alpha - (1/2 - 1/q)``; exact when alpha and q are rational."""
        if isinstance(self.alpha, Rational) and isinstance(self.q, Rational):
            bv = Fraction(1, 2) - Fraction(1, 1) / Fraction(self.q)
            a = Fraction(self.alpha)
            if a > bv:
                return "weak"
            return "boundary" if a == bv else "strong"
        diff = float(self.alpha) - self.boundary
        if abs(diff) <= BOUNDARY_TOL:
            return "boundary"
        return "weak" if diff > 0 else "strong"

    @property
    def alpha_tilde(self) -> float:
        return min(float(self.alpha), self.boundary)

    @property
    def beta_tilde(self) -> float:
        q = float(self.q)
        return (3.0 + 2.0 * self.alpha_tilde * q) / (1.0 + q)

    def sharp(self) -> "RateProfile":
        """Local-window profile: n replaced by ``n * b`` (weak regime only)."""
        if self.b is None:
            raise ValueError("sharp variant needs a bandwidth b")
        if self.regime != "weak":
            raise ValueError("sharp rate functions are defined for the "
                             "weak-dependence regime only")
        return replace(self, n=float(self.n) * float(self.b), b=None)


def H(u: float, prof: RateProfile) -> float:
    """Tail rate function; strictly decreasing in u in every regime."""
    if u <= 0:
        raise ValueError("u must be positive")
    n, q = float(prof.n), float(prof.q)
    base = u ** (2.0 - q)
    reg = prof.regime
    if reg == "weak":
        return base * n ** (1.0 - q)
    if reg == "boundary":
        return base * n ** (1.0 - q) * np.log(n) ** (1.0 + q)
    return base * n ** (-q * (float(prof.alpha) + 0.5))


def G(u: float, prof: RateProfile) -> float:
    """Gaussian-type rate function; strictly decreasing in u."""
    if u <= 0:
        raise ValueError("u must be positive")
    n = float(prof.n)
    u2 = u * u
    reg = prof.regime
    if reg == "weak":
        return (1.0 / n + u2) * np.exp(-n * u2)
    if reg == "boundary":
        ln2 = np.log(n) ** 2
        return (ln2 / n + u2) * np.exp(-n * u2 / ln2)
    nb = n ** prof.beta_tilde
    return (1.0 / nb + u2) * np.exp(-nb * u2)


def G_tilde(u: float, prof: RateProfile) -> float:
    """``min(G, u^(2-q) n^(-q/2))`` below/at the phase boundary, else G."""
    g = G(u, prof)
    if prof.regime == "weak":
        return g
    n, q = float(prof.n), float(prof.q)
    return min(g, u ** (2.0 - q) * n ** (-q / 2.0))


def H_sharp(u: float, prof: RateProfile) -> float:
    """H at the effective local sample size ``n_sharp = n * b``."""
    return H(u, prof.sharp())


def G_sharp(u: float, prof: RateProfile) -> float:
    """G at the effective local sample size ``n_sharp = n * b``."""
    return G(u, prof.sharp())


# ---------------------------------------------------------------------- #
# equation sides and the bisection solver


ModelType = Union[np.ndarray, dict, None]


def _model_d(model: ModelType, p: int, which: str) -> Callable[[float], float]:
    """Smallness side ``D(u)`` (covariance) or ``D*(u)`` (precision).

    ``model`` is either an explicit symmetric matrix (exact entrywise
    scan) or class parameters ``{"r": r, "M": M}`` giving the bound form
    ``min(u^2, u^(2-r) M / p^2)``.
    """
    if isinstance(model, np.ndarray):
        field = {"D": "D", "D_prec": "D_prec"}[which]
        return lambda u: getattr(smallness(model, u), field)
    if isinstance(model, dict):
        r, m = float(model["r"]), float(model["M"])
        return lambda u: min(u * u, u ** (2.0 - r) * m / (p * p))
    raise ValueError("this equation side needs a matrix or class-parameter "
                     "model")


def make_side(side, prof: RateProfile,
              model: ModelType = None) -> Callable[[float], float]:
    """Resolve an equation-side selector into a callable of u.

    Selectors: ``H``, ``G``, ``G_tilde``, ``H_sharp``, ``G_sharp``,
    ``max_HG``, ``max_HG_sharp``, ``min_n_max_HGtilde``, ``D``, ``D_prec``,
    or any callable.
    """
    if callable(side):
        return side
    if side == "H":
        return lambda u: H(u, prof)
    if side == "G":
        return lambda u: G(u, prof)
    if side == "G_tilde":
        return lambda u: G_tilde(u, prof)
    if side == "H_sharp":
        return lambda u: H_sharp(u, prof)
    if side == "G_sharp":
        return lambda u: G_sharp(u, prof)
    if side == "max_HG":
        return lambda u: max(H(u, prof), G(u, prof))
    if side == "max_HG_sharp":
        return lambda u: max(H_sharp(u, prof), G_sharp(u, prof))
    if side == "min_n_max_HGtilde":
        return lambda u: min(1.0 / float(prof.n),
                             max(H(u, prof), G_tilde(u, prof)))
    if side in ("D", "D_prec"):
        return _model_d(model, prof.p, side)
    raise ValueError(f"unknown equation side {side!r}")


def solve_threshold_equation(lhs, rhs, prof: RateProfile,
                             model: ModelType = None,
                             interval: tuple = (None, None),
                             rel_tol: float = 1e-8,
                             bracket_points: int = 33) -> float:
    """Bisection root of ``lhs(u) = rhs(u)`` on a bracketing interval.

    Both sides must be monotone in opposite directions over the interval
    (checked on a sampling grid: a difference that changes sign more than
    once raises :class:`NonMonotone`; no sign change raises
    :class:`NoSignChange`).  The returned root u satisfies
    ``|lhs(u) - rhs(u)| / max(lhs(u), rhs(u)) <= rel_tol``.
    """
    lo, hi = interval
    if lo is None:
        lo = 1.0 / np.sqrt(float(prof.n))
    if hi is None:
        hi = _expand_bracket(make_side(lhs, prof, model),
                             make_side(rhs, prof, model), lo)
    if not 0 < lo < hi:
        raise ValueError(f"invalid interval [{lo}, {hi}]")
    f = make_side(lhs, prof, model)
    g = make_side(rhs, prof, model)
    diff = lambda u: f(u) - g(u)
    d_lo, d_hi = diff(lo), diff(hi)
    if d_lo == 0.0:
        return float(lo)
    if d_hi == 0.0:
        return float(hi)
    if np.sign(d_lo) == np.sign(d_hi):
        raise NoSignChange(
            f"no crossing of {lhs!r} and {rhs!r} on [{lo:.4g}, {hi:.4g}]")
    grid = np.exp(np.linspace(np.log(lo), np.log(hi), bracket_points))
    signs = np.sign([diff(u) for u in grid])
    flips = int(np.sum(np.abs(np.diff(signs[signs != 0.0])) > 0))
    if flips > 1:
        raise NonMonotone(
            f"{flips} sign changes of {lhs!r} - {rhs!r} on "
            f"[{lo:.4g}, {hi:.4g}]; sides are not monotone-opposed")
    a, b = float(lo), float(hi)
    d_a = d_lo
    root = 0.5 * (a + b)
    for _ in range(400):
        root = 0.5 * (a + b)
        fv, gv = f(root), g(root)
        denom = max(fv, gv)
        if denom > 0 and abs(fv - gv) / denom <= rel_tol:
            return float(root)
        if np.sign(fv - gv) == np.sign(d_a):
            a = root
        else:
            b = root
        if b - a <= 1e-300:
            break
    fv, gv = f(root), g(root)
    denom = max(fv, gv)
    if denom > 0 and abs(fv - gv) / denom <= rel_tol:
        return float(root)
    raise NonMonotone(
        f"bisection stalled at u={root:.6g} with relative residual "
        f"{abs(fv - gv) / denom if denom > 0 else np.inf:.3e}")


def _expand_bracket(f, g, lo: float, factor: float = 2.0,
                    cap: float = 1e9) -> float:
    """Grow the right endpoint geometrically until the difference flips."""
    s0 = np.sign(f(lo) - g(lo))
    hi = max(2.0 * lo, 1.0)
    while hi < cap:
        if np.sign(f(hi) - g(hi)) != s0:
            return hi
        hi *= factor
    return cap


def solve_u_diamond(prof: RateProfile) -> float:
    """Root of ``H(u) = G(u)`` above ``n^(-1/2)`` (unique crossing)."""
    return solve_threshold_equation("H", "G", prof)


def solve_u_dagger(prof: RateProfile, model: ModelType) -> float:
    """Root of ``D(u) = H(u)``."""
    return solve_threshold_equation("D", "H", prof, model=model,
                                    interval=(1e-10, None))


def solve_u_circ(prof: RateProfile, model: ModelType) -> float:
    """Root of ``D(u) = G_tilde(u)`` on ``[n^(-1/2), u_diamond]``."""
    u_dia = solve_u_diamond(prof)
    lo = 1.0 / np.sqrt(float(prof.n))
    return solve_threshold_equation("D", "G_tilde", prof, model=model,
                                    interval=(lo, u_dia))


def solve_u_flat(prof: RateProfile, model: ModelType) -> float:
    """Root of ``D*(u) = min(n^(-1), max(G_tilde(u), H(u)))``."""
    return solve_threshold_equation("D_prec", "min_n_max_HGtilde", prof,
                                    model=model, interval=(1e-10, None))


def solve_u_flat_sharp(prof: RateProfile, model: ModelType) -> float:
    """Root of ``max(G_sharp(u), H_sharp(u)) = D*(u)`` (time-varying case)."""
    return solve_threshold_equation("max_HG_sharp", "D_prec", prof,
                                    model=model, interval=(1e-10, None))


def optimal_threshold_curve(prof: RateProfile, model: ModelType) -> float:
    """Minimizer of ``max(D(u), H(u), G_tilde(u))`` over ``u >= n^(-1/2)``.

    This is the finite-n optimal threshold implied by the Frobenius risk
    bound: the crossing of the increasing smallness side with the
    decreasing tail envelope, clamped to the admissible interval.
    """
    lo = 1.0 / np.sqrt(float(prof.n))
    d_side = make_side("D", prof, model)
    env = lambda u: max(H(u, prof), G_tilde(u, prof))
    if d_side(lo) >= env(lo):
        return float(lo)
    return solve_threshold_equation("D", env, prof, model=model,
                                    interval=(lo, None), rel_tol=1e-8)


# ---------------------------------------------------------------------- #
# regime classification over covariance classes


@dataclass(frozen=True)
class RegimeReport:
    """Effective-dimension classification of an (n, p, q, r, M) setting."""

    effective_dimension: float
    phi: float
    case: str
    threshold_rule: str
    threshold_value: float
    tie: bool


def classify_regime(prof: RateProfile, r: float, M: float) -> RegimeReport:
    """Locate ``phi = log(p^2/M) / log n`` among the four rate cases.

    Case boundaries sit at ``q-1``, ``(q+r-2)/2`` and ``r/2`` (descending
    for q > 2 > r >= 0, so the cases partition phi > 0 without gaps).  A
    phi exactly on a boundary is flagged as a tie and resolved toward the
    adjacent case with larger phi, whose rate is slower.
    """
    if not 0 <= r < 2:
        raise ValueError("class exponent r must lie in [0, 2)")
    if M <= 0:
        raise ValueError("class budget M must be positive")
    n, p, q = float(prof.n), prof.p, float(prof.q)
    eff = p * p / M
    phi = np.log(eff) / np.log(n)
    b1, b2, b3 = q - 1.0, (q + r - 2.0) / 2.0, r / 2.0
    tie = any(abs(phi - b) <= BOUNDARY_TOL * max(1.0, abs(phi))
              for b in (b1, b2, b3))
    if phi >= b1 - BOUNDARY_TOL * max(1.0, abs(phi)):
        case, rule = "i", "u ~ 1"
        value = 1.0
    elif phi >= b2 - BOUNDARY_TOL * max(1.0, abs(phi)):
        case, rule = "ii", "u_dagger' = (n^(1-q) p^2/M)^(1/(q-r))"
        value = (n ** (1.0 - q) * eff) ** (1.0 / (q - r))
    elif phi >= b3 - BOUNDARY_TOL * max(1.0, abs(phi)):
        case, rule = "iii", "u_circ' = (n^(-1) log(2 + p^2 M^(-1) n^(-r/2)))^(1/2)"
        value = np.sqrt(np.log(2.0 + eff * n ** (-r / 2.0)) / n)
    else:
        case, rule = "iv", "u <= n^(-1/2)"
        value = n ** (-0.5)
    return RegimeReport(effective_dimension=float(eff), phi=float(phi),
                        case=case, threshold_rule=rule,
                        threshold_value=float(value), tie=bool(tie))


# ---------------------------------------------------------------------- #
# spectral-norm bound machinery


def _l_alpha(prof: RateProfile) -> float:
    n, q = float(prof.n), float(prof.q)
    reg = prof.regime
    if reg == "weak":
        return n ** (1.0 / q - 1.0)
    if reg == "boundary":
        return n ** (1.0 / q - 1.0) * np.log(n) ** (1.0 + 1.0 / q)
    return n ** (-float(prof.alpha) - 0.5)


def _j_alpha(prof: RateProfile) -> float:
    n = float(prof.n)
    reg = prof.regime
    if reg == "weak":
        return n ** (-0.5)
    if reg == "boundary":
        return n ** (-0.5) * np.log(n)
    return n ** (-prof.beta_tilde / 2.0)


def spectral_bound(u: float, prof: RateProfile, sigma: np.ndarray) -> float:
    """Unit-constant spectral-norm risk bound for the thresholded estimate.

    ``D*(u) + M*(u/2) + p min(n^(-1/2), u^(1-q/2) n^(-q/4),
    sqrt(H(u) + G(c_g u)))`` where
    ``M*(v) = L_alpha p^(1/q) N*(v)^(1+1/q) + J_alpha sqrt(log p) N*(v)``.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    n, p, q = float(prof.n), prof.p, float(prof.q)
    rep = smallness(sigma, u)
    rep_half = smallness(sigma, u / 2.0)
    m_star = (_l_alpha(prof) * p ** (1.0 / q)
              * rep_half.N_star ** (1.0 + 1.0 / q)
              + _j_alpha(prof) * np.sqrt(np.log(p)) * rep_half.N_star)
    tail = min(n ** (-0.5),
               u ** (1.0 - q / 2.0) * n ** (-q / 4.0),
               np.sqrt(prof.c_h * H(u, prof) + G(prof.c_g * u, prof)))
    return float(rep.D_star + m_star + p * tail)


@dataclass(frozen=True)
class SpectralThreshold:
    """Optimized spectral threshold with its bound and the plug-in rule."""

    u: float
    bound: float
    u_bl: float


def u_bickel_levina(prof: RateProfile) -> float:
    """Unit-constant plug-in threshold ``p^(2/q) n^(-1/2)``."""
    return float(prof.p ** (2.0 / float(prof.q)) / np.sqrt(float(prof.n)))


def spectral_optimal_threshold(prof: RateProfile,
                               sigma: np.ndarray,
                               grid_size: int = 400) -> SpectralThreshold:
    """Minimize the spectral bound over a log grid, then refine.

    The grid spans ``[n^(-1/2)/10, 2 max|sigma_jk|]`` with ``grid_size``
    points; a golden-section pass between the argmin's neighbors refines
    the smooth parts (the bound has jumps where the column occupancy N*
    changes, so the refinement returns the best value seen).
    """
    n = float(prof.n)
    lo = n ** (-0.5) / 10.0
    hi = 2.0 * float(np.max(np.abs(sigma)))
    if hi <= lo:
        hi = 10.0 * lo
    grid = np.exp(np.linspace(np.log(lo), np.log(hi), grid_size))
    vals = np.array([spectral_bound(u, prof, sigma) for u in grid])
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid_size - 1)]
    best_u, best_v = grid[k], vals[k]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1 = spectral_bound(x1, prof, sigma)
    f2 = spectral_bound(x2, prof, sigma)
    for _ in range(60):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = spectral_bound(x1, prof, sigma)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = spectral_bound(x2, prof, sigma)
        if min(f1, f2) < best_v:
            best_u, best_v = (x1, f1) if f1 < f2 else (x2, f2)
    return SpectralThreshold(u=float(best_u), bound=float(best_v),
                             u_bl=u_bickel_levina(prof))


@dataclass(frozen=True)
class ClassSpectralThreshold:
    """Class-bound spectral threshold pieces u1, u2, u3 and their max u4."""

    u1: float
    u2: float
    u3: float
    u4: float
    u_bl: float


def spectral_threshold_classbound(prof: RateProfile, r: float,
                                  m_tilde: float) -> ClassSpectralThreshold:
    """Spectral threshold construction over a strong l^q-ball class.

    Uses the class-bound forms ``D*bar(u) = M~ u^(1-r)`` and
    ``N*bar(u) = min(p, M~ u^(-r))`` and solves the three crossings
    against the bound components; ``u4`` is their maximum together with
    the Gaussian floor ``sqrt(log p / n)``.
    """
    if not 0 <= r < 1:
        raise ValueError("strong-ball exponent r must lie in [0, 1)")
    n, p, q = float(prof.n), prof.p, float(prof.q)
    d_bar = lambda u: m_tilde * u ** (1.0 - r)
    n_bar = lambda u: min(float(p), m_tilde * u ** (-r))
    lhs1 = lambda u: n_bar(u) ** (1.0 + 1.0 / q) * p ** (1.0 / q) * n ** (1.0 / q - 1.0)
    lhs2 = lambda u: n_bar(u) * np.sqrt(np.log(p) / n)
    lhs3 = lambda u: p * u ** (1.0 - q / 2.0) * n ** ((1.0 - q) / 2.0)
    roots = []
    for lhs in (lhs1, lhs2, lhs3):
        roots.append(solve_threshold_equation(lhs, d_bar, prof,
                                              interval=(1e-12, 1e9)))
    floor = np.sqrt(np.log(p) / n)
    u4 = max(*roots, floor)
    return ClassSpectralThreshold(u1=roots[0], u2=roots[1], u3=roots[2],
                                  u4=float(u4), u_bl=u_bickel_levina(prof))


# ---------------------------------------------------------------------- #
# assembled risk bounds


RISK_VARIANTS = ("stationary-cov", "stationary-prec", "tv-cov", "tv-prec")


def risk_upper_bound(u: float, prof: RateProfile, model: ModelType,
                     variant: str = "stationary-cov") -> float:
    """Unit-constant normalized-Frobenius risk bound at threshold ``u``.

    Stationary variants evaluate ``D-type(u) + min(1/n, u^(2-q) n^(-q/2),
    H(u) + G(c_g u))``; the time-varying variants replace n by the local
    sample size ``n * b`` and add the squared-bias term ``b^4``.
    """
    if u <= 0:
        raise ValueError("u must be positive")
    if variant not in RISK_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; pick from "
                         f"{RISK_VARIANTS}")
    tv = variant.startswith("tv")
    eff = prof.sharp() if tv else prof
    which = "D_prec" if variant.endswith("prec") else "D"
    d_side = _model_d(model, prof.p, which)
    n, q = float(eff.n), float(eff.q)
    tail = min(1.0 / n,
               u ** (2.0 - q) * n ** (-q / 2.0),
               prof.c_h * H(u, eff) + G(prof.c_g * u, eff))
    total = d_side(u) + tail
    if tv:
        total += float(prof.b) ** 4
    return float(total)
