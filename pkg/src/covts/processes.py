"""Seeded simulation of stationary and locally stationary vector processes.

Five process families are built in:

* ``var1``: vector autoregression ``z_i = A z_{i-1} + eps_i``
* ``linear_decay``: truncated vector moving average with polynomially
  decaying coefficients ``A_m = (m+1)^(-1-gamma) B_m`` where ``B_m`` is a
  circulant-shift mixing pattern with unit row norms
* ``iterated_map``: contractive iterated random function
  ``z_i = a phi(z_{i-1}) + eps_i`` with ``phi`` identity or entrywise abs
* ``modulated``: a whitened stationary base process rescaled through a
  smooth covariance path, ``z_i = Sigma(i/n)^(1/2) y_i``
* ``nonstat_linear``: moving average with smoothly time-varying
  coefficients ``A_m(t) = g(t) A_m``

Every simulator is a pure function of ``(spec, n)``: identical inputs give
bit-identical output arrays.  Innovations are drawn from the spec's own
seeded stream (see :mod:`covts.rng`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.linalg import solve_discrete_lyapunov
from scipy.special import zeta

from .linalg import eigh_sym, spectral_radius_power, symmetrize
from .rng import make_generator

DEFAULT_BURN_IN = 1000
TRUNCATION_TAIL_BUDGET = 1e-8


class TruncationWarning(UserWarning):
    """Raised when a moving-average truncation discards non-negligible mass."""

    def __init__(self, gamma: float, trunc_lag: int, tail_fraction: float):
        self.gamma = gamma
        self.trunc_lag = trunc_lag
        self.tail_fraction = tail_fraction
        super().__init__(
            f"truncation at lag {trunc_lag} discards a fraction "
            f"{tail_fraction:.3e} of the squared coefficient mass "
            f"(gamma={gamma}, budget {TRUNCATION_TAIL_BUDGET:.0e})")


@dataclass(frozen=True)
class InnovationLaw:
    """IID innovation distribution, scaled to mean 0 and variance 1.

    ``student_t`` requires ``df > 2 * moment_order`` so that the configured
    2q-th moment is finite; with the default q = 4 any ``df <= 8`` is
    rejected.  Coordinates within one innovation vector are iid.
    """

    kind: str = "gaussian"
    df: Optional[float] = None
    moment_order: int = 4

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t"):
            raise ValueError(f"unknown innovation kind {self.kind!r}")
        if self.moment_order <= 1:
            raise ValueError("moment_order must exceed 1")
        if self.kind == "student_t":
            if self.df is None:
                raise ValueError("student_t innovations need df")
            if self.df <= 2 * self.moment_order:
                raise ValueError(
                    f"student_t df={self.df} gives infinite moment of order "
                    f"{2 * self.moment_order}; need df > {2 * self.moment_order}")
        elif self.df is not None:
            raise ValueError("df is only meaningful for student_t")

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Draw an array of iid unit-variance innovations."""
        if self.kind == "gaussian":
            return rng.standard_normal(shape)
        scale = np.sqrt((self.df - 2.0) / self.df)
        return rng.standard_t(self.df, size=shape) * scale


def student_t_unit_moment8(df: float) -> float:
    """Analytic 8th moment of the unit-variance rescaled Student-t law."""
    if df <= 8:
        return np.inf
    from scipy.special import gammaln
    log_m8 = (4 * np.log(df)
              + gammaln(4.5) + gammaln(df / 2.0 - 4)
              - gammaln(0.5) - gammaln(df / 2.0))
    return float(np.exp(log_m8) * ((df - 2.0) / df) ** 4)


@dataclass(frozen=True)
class CovPath:
    """Declarative covariance path ``Sigma(t)`` on rescaled time [0, 1].

    Kinds:

    * ``constant``: ``Sigma(t) = base``
    * ``scale``: ``Sigma(t) = c(t) * base`` with
      ``c(t) = offset + slope*t + amp*sin(2*pi*freq*t)``
    * ``blend``: ``Sigma(t) = (1-t)*base + t*other`` (PD whenever both
      endpoints are PD)
    """

    kind: str = "constant"
    base: tuple = ()
    other: tuple = ()
    offset: float = 1.0
    slope: float = 0.0
    amp: float = 0.0
    freq: float = 1.0

    @staticmethod
    def constant(sigma: np.ndarray) -> "CovPath":
        return CovPath(kind="constant", base=_freeze(sigma))

    @staticmethod
    def scale(sigma: np.ndarray, offset: float = 1.0, slope: float = 0.0,
              amp: float = 0.0, freq: float = 1.0) -> "CovPath":
        return CovPath(kind="scale", base=_freeze(sigma), offset=offset,
                       slope=slope, amp=amp, freq=freq)

    @staticmethod
    def blend(sigma_a: np.ndarray, sigma_b: np.ndarray) -> "CovPath":
        return CovPath(kind="blend", base=_freeze(sigma_a),
                       other=_freeze(sigma_b))

    @property
    def p(self) -> int:
        return len(self.base)

    def base_matrix(self) -> np.ndarray:
        return np.array(self.base, dtype=float)

    def scalar_at(self, t: float) -> float:
        return (self.offset + self.slope * t
                + self.amp * np.sin(2.0 * np.pi * self.freq * t))

    def at(self, t: float) -> np.ndarray:
        """Evaluate ``Sigma(t)``."""
        base = self.base_matrix()
        if self.kind == "constant":
            return base
        if self.kind == "scale":
            return self.scalar_at(t) * base
        if self.kind == "blend":
            return (1.0 - t) * base + t * np.array(self.other, dtype=float)
        raise ValueError(f"unknown covariance path kind {self.kind!r}")

    def validate_positive_definite(self, times) -> None:
        """Reject paths whose minimum eigenvalue is <= 0 at any checked t."""
        base = self.base_matrix()
        w_base = eigh_sym(base)[0]
        if self.kind == "constant":
            if w_base[0] <= 0:
                raise ValueError("covariance path is not positive definite")
            return
        if self.kind == "scale":
            if w_base[0] <= 0:
                raise ValueError("covariance path base is not positive definite")
            cmin = float(np.min(self.scalar_at(np.asarray(times, dtype=float))))
            if cmin <= 0:
                raise ValueError(
                    f"covariance scale path reaches {cmin:.3e} <= 0")
            return
        # blend: convex combination of the two endpoint matrices
        w_other = eigh_sym(np.array(self.other, dtype=float))[0]
        if w_base[0] <= 0 or w_other[0] <= 0:
            raise ValueError("blend endpoints must both be positive definite")


def _freeze(a: np.ndarray) -> tuple:
    """Nested-tuple copy of a 2-d array, for storage in frozen dataclasses."""
    a = np.asarray(a, dtype=float)
    return tuple(tuple(float(x) for x in row) for row in a)


@dataclass
class ProcessSpec:
    """Declarative description of a data-generating process.

    Build instances with the classmethod constructors (:meth:`var1`,
    :meth:`linear_decay`, :meth:`iterated_map`, :meth:`modulated`,
    :meth:`nonstat_linear`), which validate the kind-specific parameters.
    """

    kind: str
    p: int
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN
    innovation: InnovationLaw = field(default_factory=InnovationLaw)
    # var1 / iterated_map
    a_matrix: Optional[np.ndarray] = None
    innovation_factor: Optional[np.ndarray] = None
    map_coeff: Optional[float] = None
    map_kind: str = "identity"
    # linear_decay / nonstat_linear
    gamma: Optional[float] = None
    trunc_lag: Optional[int] = None
    coeff_offset: float = 1.0
    coeff_slope: float = 0.0
    # modulated
    base: Optional["ProcessSpec"] = None
    cov_path: Optional[CovPath] = None

    # ------------------------------------------------------------------ #
    # constructors

    @classmethod
    def var1(cls, a, *, p: Optional[int] = None, seed: int = 0,
             burn_in: int = DEFAULT_BURN_IN,
             innovation: Optional[InnovationLaw] = None,
             innovation_factor: Optional[np.ndarray] = None) -> "ProcessSpec":
        """Vector AR(1) ``z_i = A z_{i-1} + eps_i`` with spectral radius < 1.

        ``a`` may be a scalar (interpreted as ``a * I_p``, requires ``p``)
        or a full transition matrix.
        """
        if np.isscalar(a):
            if p is None:
                raise ValueError("scalar transition coefficient requires p")
            a_mat = float(a) * np.eye(p)
        else:
            a_mat = np.array(a, dtype=float)
            if a_mat.ndim != 2 or a_mat.shape[0] != a_mat.shape[1]:
                raise ValueError("transition matrix must be square")
            if p is not None and p != a_mat.shape[0]:
                raise ValueError("p does not match transition matrix size")
            p = a_mat.shape[0]
        rho = spectral_radius_power(a_mat)
        if rho >= 1.0:
            raise ValueError(
                f"var1 transition matrix has spectral radius {rho:.4f} >= 1")
        if innovation_factor is not None:
            innovation_factor = np.array(innovation_factor, dtype=float)
            if innovation_factor.shape != (p, p):
                raise ValueError("innovation factor must be p x p")
        return cls(kind="var1", p=p, seed=seed, burn_in=burn_in,
                   innovation=innovation or InnovationLaw(),
                   a_matrix=a_mat, innovation_factor=innovation_factor)

    @classmethod
    def iid(cls, p: int, *, seed: int = 0,
            innovation: Optional[InnovationLaw] = None) -> "ProcessSpec":
        """IID innovation columns (a VAR(1) with zero transition)."""
        return cls.var1(0.0, p=p, seed=seed, burn_in=0,
                        innovation=innovation)

    @classmethod
    def linear_decay(cls, gamma: float, *, p: int, seed: int = 0,
                     trunc_lag: Optional[int] = None,
                     innovation: Optional[InnovationLaw] = None) -> "ProcessSpec":
        """Truncated MA with coefficients ``(m+1)^(-1-gamma)`` and circulant mixing.

        When ``trunc_lag`` is omitted it is chosen so the discarded squared
        coefficient mass is at most 1e-8 of the total.
        """
        if gamma <= 0:
            raise ValueError("decay exponent gamma must be positive")
        if trunc_lag is None:
            trunc_lag = default_trunc_lag(gamma)
        trunc_lag = int(trunc_lag)
        if trunc_lag < 0:
            raise ValueError("truncation lag must be >= 0")
        return cls(kind="linear_decay", p=p, seed=seed, burn_in=0,
                   innovation=innovation or InnovationLaw(),
                   gamma=float(gamma), trunc_lag=trunc_lag)

    @classmethod
    def iterated_map(cls, a: float, map_kind: str = "identity", *, p: int,
                     seed: int = 0, burn_in: int = DEFAULT_BURN_IN,
                     innovation: Optional[InnovationLaw] = None) -> "ProcessSpec":
        """Contractive iterated random function ``z_i = a phi(z_{i-1}) + eps_i``.

        Both built-in maps (identity and entrywise absolute value) are
        1-Lipschitz, so the stochastic Lipschitz constant equals ``|a| < 1``.
        """
        if map_kind not in ("identity", "abs"):
            raise ValueError(f"unknown map kind {map_kind!r}")
        if abs(a) >= 1.0:
            raise ValueError(f"contraction coefficient |a|={abs(a)} >= 1")
        return cls(kind="iterated_map", p=p, seed=seed, burn_in=burn_in,
                   innovation=innovation or InnovationLaw(),
                   map_coeff=float(a), map_kind=map_kind)

    @classmethod
    def modulated(cls, base: "ProcessSpec", cov_path: CovPath) -> "ProcessSpec":
        """Whitened stationary base process rescaled by ``Sigma(t)^(1/2)``.

        The base process must admit an analytic stationary covariance so it
        can be whitened to identity covariance (raises otherwise).
        """
        if base.kind not in ("var1", "linear_decay", "iterated_map"):
            raise ValueError("modulated base must be a stationary spec")
        stationary_cov(base)  # raises if no analytic covariance
        if cov_path.p != base.p:
            raise ValueError("covariance path dimension does not match base")
        # probe grid check now; simulation re-validates at the requested times
        cov_path.validate_positive_definite(np.linspace(0.0, 1.0, 101))
        return cls(kind="modulated", p=base.p, seed=base.seed, burn_in=0,
                   innovation=base.innovation, base=base, cov_path=cov_path)

    @classmethod
    def nonstat_linear(cls, gamma: float, *, p: int, seed: int = 0,
                       trunc_lag: Optional[int] = None,
                       scale: tuple = (1.0, 0.0),
                       innovation: Optional[InnovationLaw] = None) -> "ProcessSpec":
        """Time-varying MA ``z_i = sum_m g(i/n) A_m eps_{i-m}``.

        ``g(t) = scale[0] + scale[1] * t`` multiplies the stationary
        coefficient family uniformly across lags.
        """
        spec = cls.linear_decay(gamma, p=p, seed=seed, trunc_lag=trunc_lag,
                                innovation=innovation)
        spec.kind = "nonstat_linear"
        spec.coeff_offset = float(scale[0])
        spec.coeff_slope = float(scale[1])
        return spec

    # ------------------------------------------------------------------ #
    # serialization (harness config format)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "p": self.p, "seed": self.seed,
             "burn_in": self.burn_in,
             "innovation": {k: v for k, v in asdict(self.innovation).items()
                            if v is not None}}
        if self.kind == "var1":
            d["a_matrix"] = np.asarray(self.a_matrix).tolist()
            if self.innovation_factor is not None:
                d["innovation_factor"] = np.asarray(self.innovation_factor).tolist()
        elif self.kind in ("linear_decay", "nonstat_linear"):
            d["gamma"] = self.gamma
            d["trunc_lag"] = self.trunc_lag
            if self.kind == "nonstat_linear":
                d["scale"] = [self.coeff_offset, self.coeff_slope]
        elif self.kind == "iterated_map":
            d["map_coeff"] = self.map_coeff
            d["map_kind"] = self.map_kind
        elif self.kind == "modulated":
            d["base"] = self.base.to_dict()
            cp = self.cov_path
            d["cov_path"] = {"kind": cp.kind, "base": [list(r) for r in cp.base],
                             "other": [list(r) for r in cp.other],
                             "offset": cp.offset, "slope": cp.slope,
                             "amp": cp.amp, "freq": cp.freq}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessSpec":
        kind = d["kind"]
        law = InnovationLaw(**d.get("innovation", {}))
        if kind == "var1":
            a = d["a_matrix"]
            if not np.isscalar(a):
                a = np.array(a, dtype=float)
            return cls.var1(a, p=d.get("p"), seed=d.get("seed", 0),
                            burn_in=d.get("burn_in", DEFAULT_BURN_IN),
                            innovation=law,
                            innovation_factor=(np.array(d["innovation_factor"])
                                               if "innovation_factor" in d else None))
        if kind == "linear_decay":
            return cls.linear_decay(d["gamma"], p=d["p"], seed=d.get("seed", 0),
                                    trunc_lag=d.get("trunc_lag"), innovation=law)
        if kind == "nonstat_linear":
            return cls.nonstat_linear(d["gamma"], p=d["p"], seed=d.get("seed", 0),
                                      trunc_lag=d.get("trunc_lag"),
                                      scale=tuple(d.get("scale", (1.0, 0.0))),
                                      innovation=law)
        if kind == "iterated_map":
            return cls.iterated_map(d["map_coeff"], d.get("map_kind", "identity"),
                                    p=d["p"], seed=d.get("seed", 0),
                                    burn_in=d.get("burn_in", DEFAULT_BURN_IN),
                                    innovation=law)
        if kind == "modulated":
            base = cls.from_dict(d["base"])
            cp = d["cov_path"]
            path = CovPath(kind=cp["kind"],
                           base=_freeze(np.array(cp["base"], dtype=float)),
                           other=(_freeze(np.array(cp["other"], dtype=float))
                                  if cp.get("other") else ()),
                           offset=cp.get("offset", 1.0), slope=cp.get("slope", 0.0),
                           amp=cp.get("amp", 0.0), freq=cp.get("freq", 1.0))
            return cls.modulated(base, path)
        raise ValueError(f"unknown process kind {kind!r}")

    def with_seed(self, seed: int) -> "ProcessSpec":
        """Copy of this spec (and any base sub-spec) reseeded with ``seed``."""
        import copy
        spec = copy.deepcopy(self)
        spec.seed = int(seed)
        if spec.base is not None:
            spec.base.seed = int(seed)
        return spec


def default_trunc_lag(gamma: float) -> int:
    """Smallest lag M with tail mass below the 1e-8 truncation budget.

    The squared coefficient mass of the built-in family is
    ``sum_m (m+1)^(-2-2*gamma)``; the returned M satisfies
    ``sum_{m>M} (m+1)^(-2-2*gamma) <= 1e-8 * total``.
    """
    s = 2.0 + 2.0 * gamma
    total = zeta(s, 1.0)
    lo, hi = 1, 2
    while zeta(s, hi + 2.0) > TRUNCATION_TAIL_BUDGET * total:
        lo, hi = hi, hi * 2
        if hi > 10 ** 9:
            raise ValueError("default truncation lag exceeds 1e9; "
                             "set trunc_lag explicitly")
    while lo < hi:
        mid = (lo + hi) // 2
        if zeta(s, mid + 2.0) <= TRUNCATION_TAIL_BUDGET * total:
            hi = mid
        else:
            lo = mid + 1
    return hi


def truncation_tail_fraction(gamma: float, trunc_lag: int) -> float:
    """Fraction of squared coefficient mass discarded at ``trunc_lag``."""
    s = 2.0 + 2.0 * gamma
    return float(zeta(s, trunc_lag + 2.0) / zeta(s, 1.0))


# ---------------------------------------------------------------------- #
# simulators


def simulate(spec: ProcessSpec, n: int) -> np.ndarray:
    """Simulate ``n`` columns of the process described by ``spec``.

    Returns the p x n data matrix whose column ``i`` (0-based) is the
    observation at time ``i + 1``.
    """
    if n <= 0:
        raise ValueError("sample size n must be >= 1")
    if spec.kind == "var1":
        z = _simulate_var1(spec, n)
    elif spec.kind == "linear_decay":
        z = _simulate_linear(spec, n)
    elif spec.kind == "iterated_map":
        z = _simulate_iterated(spec, n)
    elif spec.kind == "modulated":
        z = _simulate_modulated(spec, n)
    elif spec.kind == "nonstat_linear":
        z = _simulate_nonstat_linear(spec, n)
    else:
        raise ValueError(f"unknown process kind {spec.kind!r}")
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("simulation produced non-finite values")
    return z


def simulate_var1(spec: ProcessSpec, n: int) -> np.ndarray:
    if spec.kind != "var1":
        raise ValueError("spec is not a var1 process")
    return simulate(spec, n)


def simulate_linear_process(spec: ProcessSpec, n: int) -> np.ndarray:
    if spec.kind != "linear_decay":
        raise ValueError("spec is not a linear_decay process")
    return simulate(spec, n)


def simulate_iterated_map(spec: ProcessSpec, n: int) -> np.ndarray:
    if spec.kind != "iterated_map":
        raise ValueError("spec is not an iterated_map process")
    return simulate(spec, n)


def simulate_modulated(spec: ProcessSpec, n: int) -> np.ndarray:
    if spec.kind != "modulated":
        raise ValueError("spec is not a modulated process")
    return simulate(spec, n)


def simulate_nonstat_linear(spec: ProcessSpec, n: int) -> np.ndarray:
    if spec.kind != "nonstat_linear":
        raise ValueError("spec is not a nonstat_linear process")
    return simulate(spec, n)


def _recursion(spec: ProcessSpec, n: int, step) -> np.ndarray:
    """Shared recursion driver: burn in from 0, then record n columns.

    ``step(z, eps)`` maps the previous state and a fresh innovation to the
    next state.  var1 and iterated_map share this driver (and hence the
    innovation draw schedule), so an identity-map chain with coefficient a
    is bit-identical to a VAR(1) with transition ``a * I``.
    """
    rng = make_generator(spec.seed)
    p = spec.p
    z = np.zeros(p)
    for _ in range(spec.burn_in):
        z = step(z, spec.innovation.draw(rng, p))
    out = np.empty((p, n))
    for i in range(n):
        z = step(z, spec.innovation.draw(rng, p))
        out[:, i] = z
    return out


def _simulate_var1(spec: ProcessSpec, n: int) -> np.ndarray:
    a = spec.a_matrix
    factor = spec.innovation_factor

    def step(z, eps):
        if factor is not None:
            eps = factor @ eps
        return a @ z + eps

    return _recursion(spec, n, step)


def _simulate_iterated(spec: ProcessSpec, n: int) -> np.ndarray:
    a = spec.map_coeff
    if spec.map_kind == "identity":
        def step(z, eps):
            return a * z + eps
    else:
        def step(z, eps):
            return a * np.abs(z) + eps

    return _recursion(spec, n, step)


def linear_coefficients(spec: ProcessSpec) -> np.ndarray:
    """Scalar lag coefficients ``(m+1)^(-1-gamma)`` for m = 0..trunc_lag."""
    m = np.arange(spec.trunc_lag + 1, dtype=float)
    return (m + 1.0) ** (-1.0 - spec.gamma)


def _simulate_linear(spec: ProcessSpec, n: int,
                     column_scale: Optional[np.ndarray] = None) -> np.ndarray:
    tail = truncation_tail_fraction(spec.gamma, spec.trunc_lag)
    if tail > TRUNCATION_TAIL_BUDGET:
        warnings.warn(TruncationWarning(spec.gamma, spec.trunc_lag, tail),
                      stacklevel=3)
    rng = make_generator(spec.seed)
    p, big_m = spec.p, spec.trunc_lag
    coeffs = linear_coefficients(spec)
    eps = spec.innovation.draw(rng, (p, n + big_m))
    z = np.zeros((p, n))
    for m in range(big_m + 1):
        # Alternating circulant shift: B_m is the identity at even lags and
        # the one-step cyclic shift at odd lags.  Even lags keep coordinates
        # aligned, so serial dependence is visible in each coordinate's own
        # autocovariance; odd lags couple neighboring coordinates.
        shift = (m % 2) % p
        shifted = np.roll(eps, -shift, axis=0) if shift else eps
        z += coeffs[m] * shifted[:, big_m - m:big_m - m + n]
    if column_scale is not None:
        z *= column_scale[np.newaxis, :]
    return z


def _simulate_nonstat_linear(spec: ProcessSpec, n: int) -> np.ndarray:
    t = np.arange(1, n + 1, dtype=float) / n
    g = spec.coeff_offset + spec.coeff_slope * t
    return _simulate_linear(spec, n, column_scale=g)


def _simulate_modulated(spec: ProcessSpec, n: int) -> np.ndarray:
    path = spec.cov_path
    t = np.arange(1, n + 1, dtype=float) / n
    path.validate_positive_definite(t)
    y = simulate(spec.base, n)
    y = whiten(spec.base, y)
    base = path.base_matrix()
    root = matrix_sqrt(base)
    if path.kind == "constant":
        return root @ y
    if path.kind == "scale":
        return (root @ y) * np.sqrt(path.scalar_at(t))[np.newaxis, :]
    out = np.empty_like(y)
    for i, ti in enumerate(t):
        out[:, i] = matrix_sqrt(path.at(ti)) @ y[:, i]
    return out


# ---------------------------------------------------------------------- #
# analytic covariances


def matrix_sqrt(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition; requires PSD input."""
    w, q = eigh_sym(symmetrize(sigma))
    if w[0] < -1e-10 * max(1.0, abs(w[-1])):
        raise ValueError(f"matrix square root of indefinite matrix "
                         f"(min eigenvalue {w[0]:.3e})")
    return (q * np.sqrt(np.maximum(w, 0.0))) @ q.T


def stationary_cov(spec: ProcessSpec) -> np.ndarray:
    """Analytic stationary covariance of a stationary process spec.

    Supports var1 (discrete Lyapunov equation), linear_decay (orthogonal
    mixing makes it a multiple of the identity) and the identity-map
    iterated chain.  The abs-map chain has no closed form and is rejected.
    """
    if spec.kind == "var1":
        sig_eps = np.eye(spec.p)
        if spec.innovation_factor is not None:
            sig_eps = spec.innovation_factor @ spec.innovation_factor.T
        return symmetrize(solve_discrete_lyapunov(spec.a_matrix, sig_eps))
    if spec.kind == "linear_decay":
        coeffs = linear_coefficients(spec)
        return float(np.sum(coeffs ** 2)) * np.eye(spec.p)
    if spec.kind == "iterated_map":
        if spec.map_kind != "identity":
            raise ValueError("no analytic covariance for the abs-map chain")
        a = spec.map_coeff
        return np.eye(spec.p) / (1.0 - a * a)
    raise ValueError(f"no stationary covariance for kind {spec.kind!r}")


def whiten(spec: ProcessSpec, z: np.ndarray) -> np.ndarray:
    """Rescale a simulated path so its population covariance is identity."""
    cov = stationary_cov(spec)
    diag = np.diag(cov)
    if np.allclose(cov, np.diag(diag)) and np.ptp(diag) == 0.0:
        return z / np.sqrt(diag[0])  # scalar covariance: exact cheap path
    w, q = eigh_sym(cov)
    if w[0] <= 0:
        raise ValueError("base covariance is not positive definite")
    inv_root = (q / np.sqrt(w)) @ q.T
    return inv_root @ z


def truth_at(spec: ProcessSpec, t: float) -> np.ndarray:
    """Population covariance of the process at rescaled time ``t``.

    Stationary specs return their time-invariant covariance; the modulated
    and nonstat_linear families return the covariance path value.
    """
    if spec.kind == "modulated":
        return spec.cov_path.at(t)
    if spec.kind == "nonstat_linear":
        g = spec.coeff_offset + spec.coeff_slope * t
        coeffs = linear_coefficients(spec)
        return (g * g) * float(np.sum(coeffs ** 2)) * np.eye(spec.p)
    return stationary_cov(spec)
