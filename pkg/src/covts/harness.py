"""Monte Carlo experiment orchestration.

An experiment is described by a JSON-compatible :class:`ExperimentConfig`:
a process template, a ground-truth model reference, an estimator, a
geometric threshold/penalty grid, lists of (n, p) sizes, a replication
count and a master seed.  ``run_experiment`` simulates, estimates over the
grid and scores each cell against the truth, producing a deterministic row
table plus per-grid-point aggregates.

Determinism: every cell derives its stream from
``(master_seed, n_index, p_index, replication)``, so results do not depend
on execution order; replications may fan out to a process pool
(``COVTS_WORKERS`` caps the worker count) and serial and concurrent runs
write byte-identical ``rows.csv``.  Wall-clock timings are confined to
``meta.json``.

Config file schema (JSON object, all keys lowercase):

``name``          free-form label
``estimator``     one of threshold_cov, pd_threshold_cov, glasso,
                  glasso_corr, kernel_cov_threshold, tv_glasso
``process``       process template (see below)
``truth``         truth model reference (see below)
``grid``          {"lo": float, "hi": float, "count": int} geometric grid
                  of thresholds u (covariance estimators) or penalties
                  lambda (precision estimators)
``n_list``        sample sizes, ``p_list`` dimensions
``replications``  Monte Carlo replications per (n, p)
``master_seed``   64-bit integer
``bandwidth``     {"value": b} or {"coefficient": c, "power": e} meaning
                  b = c * n**e (default 1.0 * n**-0.2); tv estimators only
``eval_times``    rescaled times for tv estimators (default [0.5])
``constants``     multipliers forwarded to rate evaluations (optional)

Truth references: {"kind": "identity"},
{"kind": "rational_quadratic", "K": ..., "tau": ... or "tau_power": ...},
{"kind": "gamma_exponential", "theta": ..., "tau"/"tau_power": ...},
{"kind": "banded", "rho": ..., "width": ...},
{"kind": "counterexample", "eps": ... or "max"}.
Spatial truths draw sites uniformly on the ``sqrt(p)`` square from a seed
derived from the master seed and p.

Process templates are ProcessSpec dictionaries without ``p`` or ``seed``
(filled per cell).  A modulated template may set ``"cov_path":
{"kind": "truth"}`` (color the whitened base by the truth covariance) or
``{"kind": "truth_scale", "offset": a, "slope": b}`` for a time-varying
multiple of the truth.
"""

from __future__ import annotations

import csv
import datetime
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .covmodels import (counterexample_matrix, gamma_exponential_cov,
                        precision_from_cov, rational_quadratic_cov,
                        uniform_sites)
from .estimators import (default_floor, frob_err, kernel_cov,
                         positive_definitize, sample_cov, spectral_err,
                         threshold)
from .glasso import NonConvergence, glasso_correlation_variant, glasso_fit
from .processes import CovPath, ProcessSpec, simulate, truth_at
from .rng import derive_seed

ESTIMATORS = ("threshold_cov", "pd_threshold_cov", "glasso", "glasso_corr",
              "kernel_cov_threshold", "tv_glasso")

_SITES_TAG = 311
_CELL_TAG = 101
_CV_TAG = 977

ROW_COLUMNS = ("n", "p", "rep", "grid_value", "frob_risk", "spectral_err",
               "kept", "runtime_ms")


@dataclass
class ExperimentConfig:
    """Validated experiment description; see the module docstring for the
    field-by-field file schema."""

    estimator: str
    process: dict
    truth: dict
    grid: dict
    n_list: list
    p_list: list
    replications: int
    master_seed: int
    name: str = "experiment"
    bandwidth: dict = field(default_factory=lambda: {"coefficient": 1.0,
                                                     "power": -0.2})
    eval_times: list = field(default_factory=lambda: [0.5])
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        g = self.grid
        if not (0 < g["lo"] < g["hi"]) or int(g["count"]) < 1:
            raise ValueError("grid must satisfy 0 < lo < hi with count >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.n_list or not self.p_list:
            raise ValueError("n_list and p_list must be nonempty")

    def grid_values(self) -> np.ndarray:
        g = self.grid
        count = int(g["count"])
        if count == 1:
            return np.array([float(g["lo"])])
        return np.exp(np.linspace(np.log(g["lo"]), np.log(g["hi"]), count))

    def bandwidth_at(self, n: int) -> float:
        if "value" in self.bandwidth:
            return float(self.bandwidth["value"])
        c = float(self.bandwidth.get("coefficient", 1.0))
        e = float(self.bandwidth.get("power", -0.2))
        return c * float(n) ** e

    def to_dict(self) -> dict:
        return {"name": self.name, "estimator": self.estimator,
                "process": self.process, "truth": self.truth,
                "grid": self.grid, "n_list": list(self.n_list),
                "p_list": list(self.p_list),
                "replications": self.replications,
                "master_seed": self.master_seed,
                "bandwidth": self.bandwidth,
                "eval_times": list(self.eval_times),
                "constants": self.constants}

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        known = {"name", "estimator", "process", "truth", "grid", "n_list",
                 "p_list", "replications", "master_seed", "bandwidth",
                 "eval_times", "constants"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return ExperimentConfig(**d)

    @staticmethod
    def from_json_file(path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.from_dict(json.load(fh))


def config_hash(cfg_dict: dict) -> str:
    """SHA-256 of the canonical (sorted-keys, compact) JSON form."""
    canon = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------- #
# truth models and process instantiation


def build_truth(truth: dict, p: int, master_seed: int) -> np.ndarray:
    """Materialize a truth covariance reference at dimension ``p``."""
    kind = truth["kind"]
    if kind == "identity":
        return np.eye(p)
    if kind in ("rational_quadratic", "gamma_exponential"):
        tau = (float(truth["tau"]) if "tau" in truth
               else float(p) ** float(truth["tau_power"]))
        seed = derive_seed(master_seed, _SITES_TAG, p)
        sites = uniform_sites(p, np.sqrt(p), seed=seed)
        if kind == "rational_quadratic":
            return rational_quadratic_cov(sites, float(truth["K"]), tau)
        return gamma_exponential_cov(sites, tau, float(truth["theta"]))
    if kind == "banded":
        rho = float(truth["rho"])
        width = int(truth.get("width", 1))
        sigma = np.eye(p)
        for k in range(1, width + 1):
            off = np.full(p - k, rho ** k)
            sigma += np.diag(off, k) + np.diag(off, -k)
        if np.linalg.eigvalsh(sigma)[0] <= 0:
            raise ValueError("banded truth is not positive definite")
        return sigma
    if kind == "counterexample":
        eps = truth.get("eps", "max")
        if eps == "max":
            eps = (p - 1) ** (-0.5)
        return counterexample_matrix(p, float(eps))
    raise ValueError(f"unknown truth kind {kind!r}")


def make_process(template: dict, truth_sigma: np.ndarray, p: int,
                 seed: int) -> ProcessSpec:
    """Instantiate a process template at dimension p with a derived seed."""
    d = dict(template)
    d["p"] = p
    d["seed"] = int(seed)
    cov_path = d.pop("cov_path", None)
    if d["kind"] == "modulated":
        base = dict(d["base"])
        base["p"] = p
        base["seed"] = int(seed)
        base_spec = ProcessSpec.from_dict(base)
        if cov_path is None or cov_path.get("kind") == "truth":
            path = CovPath.constant(truth_sigma)
        elif cov_path.get("kind") == "truth_scale":
            path = CovPath.scale(truth_sigma,
                                 offset=float(cov_path.get("offset", 1.0)),
                                 slope=float(cov_path.get("slope", 0.0)),
                                 amp=float(cov_path.get("amp", 0.0)),
                                 freq=float(cov_path.get("freq", 1.0)))
        else:
            path = CovPath(**cov_path)
        return ProcessSpec.modulated(base_spec, path)
    return ProcessSpec.from_dict(d)


# ---------------------------------------------------------------------- #
# the Monte Carlo driver


@dataclass
class ExperimentResult:
    """Row table plus aggregates and reproducibility metadata."""

    rows: list          # tuples matching ROW_COLUMNS
    aggregate: list     # dicts: n, p, grid_value, means, standard errors
    meta: dict

    def rows_csv_bytes(self) -> bytes:
        """Deterministic rows.csv payload (RFC-4180, runtime column empty).

        Cell runtimes are nondeterministic, so they are reported in
        meta.json only; the runtime_ms column is kept in the schema but
        left empty to preserve byte-level reproducibility.
        """
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n",
                            quoting=csv.QUOTE_MINIMAL)
        writer.writerow(ROW_COLUMNS)
        for row in self.rows:
            n, p, rep, g, fr, se, kept, _rt = row
            writer.writerow([n, p, rep, repr(float(g)), repr(float(fr)),
                             repr(float(se)), kept, ""])
        return buf.getvalue().encode("utf-8")

    def write(self, out_dir) -> dict:
        """Write rows.csv, aggregate.csv and meta.json under ``out_dir``."""
        os.makedirs(out_dir, exist_ok=True)
        paths = {"rows": os.path.join(out_dir, "rows.csv"),
                 "aggregate": os.path.join(out_dir, "aggregate.csv"),
                 "meta": os.path.join(out_dir, "meta.json")}
        with open(paths["rows"], "wb") as fh:
            fh.write(self.rows_csv_bytes())
        with open(paths["aggregate"], "w", encoding="utf-8",
                  newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["n", "p", "grid_value", "mean_frob_risk",
                             "se_frob_risk", "mean_spectral_err",
                             "se_spectral_err", "mean_kept", "optimal"])
            for a in self.aggregate:
                writer.writerow([a["n"], a["p"], repr(a["grid_value"]),
                                 repr(a["mean_frob_risk"]),
                                 repr(a["se_frob_risk"]),
                                 repr(a["mean_spectral_err"]),
                                 repr(a["se_spectral_err"]),
                                 repr(a["mean_kept"]),
                                 int(a["optimal"])])
        with open(paths["meta"], "w", encoding="utf-8") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return paths

    def optimal_risk(self, n: int, p: int) -> tuple:
        """(grid_value, mean_frob_risk) of the empirical optimum at (n, p)."""
        for a in self.aggregate:
            if a["n"] == n and a["p"] == p and a["optimal"]:
                return a["grid_value"], a["mean_frob_risk"]
        raise KeyError(f"no aggregate entry for n={n}, p={p}")


def _estimate_cell(cfg: ExperimentConfig, z: np.ndarray,
                   truth_sigma: np.ndarray, spec: ProcessSpec,
                   n: int) -> list:
    """Score the configured estimator over the grid for one replication.

    Returns a list of (grid_value, frob, spectral, kept, runtime_ms,
    flag) tuples; a per-point failure is recorded as NaN errors with the
    exception name in ``flag``.
    """
    grid = cfg.grid_values()
    est = cfg.estimator
    out = []
    try:
        if est in ("threshold_cov", "pd_threshold_cov", "glasso",
                   "glasso_corr"):
            s_hat = sample_cov(z)
        if est in ("glasso", "glasso_corr"):
            omega_truth = precision_from_cov(truth_sigma)
        if est in ("kernel_cov_threshold", "tv_glasso"):
            b = cfg.bandwidth_at(n)
            s_hats = [kernel_cov(z, t, b) for t in cfg.eval_times]
            truths = [truth_at(spec, t) for t in cfg.eval_times]
            if est == "tv_glasso":
                omega_truths = [precision_from_cov(sig) for sig in truths]
    except (NonConvergence, ValueError, FloatingPointError) as exc:
        # whole-cell failure: every grid point gets a flagged row
        flag = type(exc).__name__
        return [(float(g), float("nan"), float("nan"), 0, 0.0, flag)
                for g in grid]
    for g in grid:
        t0 = time.perf_counter()
        flag = ""
        try:
            if est == "threshold_cov":
                te = threshold(s_hat, g)
                fr = frob_err(te.matrix, truth_sigma)
                se = spectral_err(te.matrix, truth_sigma)
                kept = te.kept
            elif est == "pd_threshold_cov":
                te = threshold(s_hat, g)
                floor = default_floor(te)
                mat = (positive_definitize(te.matrix, floor) if floor > 0
                       else te.matrix)
                fr = frob_err(mat, truth_sigma)
                se = spectral_err(mat, truth_sigma)
                kept = te.kept
            elif est in ("glasso", "glasso_corr"):
                fit = (glasso_fit(s_hat, g) if est == "glasso"
                       else glasso_correlation_variant(s_hat, g))
                fr = frob_err(fit.omega, omega_truth)
                se = spectral_err(fit.omega, omega_truth)
                kept = int(np.sum(fit.omega != 0.0))
            elif est == "kernel_cov_threshold":
                frs, ses, kepts = [], [], []
                for s_t, sig_t in zip(s_hats, truths):
                    te = threshold(s_t, g)
                    frs.append(frob_err(te.matrix, sig_t))
                    ses.append(spectral_err(te.matrix, sig_t))
                    kepts.append(te.kept)
                fr, se = float(np.mean(frs)), float(np.mean(ses))
                kept = int(round(np.mean(kepts)))
            else:  # tv_glasso
                frs, ses, kepts = [], [], []
                for s_t, om_t in zip(s_hats, omega_truths):
                    fit = glasso_fit(s_t, g)
                    frs.append(frob_err(fit.omega, om_t))
                    ses.append(spectral_err(fit.omega, om_t))
                    kepts.append(int(np.sum(fit.omega != 0.0)))
                fr, se = float(np.mean(frs)), float(np.mean(ses))
                kept = int(round(np.mean(kepts)))
        except (NonConvergence, ValueError, FloatingPointError) as exc:
            fr, se, kept = float("nan"), float("nan"), 0
            flag = type(exc).__name__
        runtime_ms = (time.perf_counter() - t0) * 1e3
        out.append((float(g), fr, se, kept, runtime_ms, flag))
    return out


def _run_cell(payload: dict) -> dict:
    """Worker entry point: one (n, p, replication) cell, pure given seeds."""
    cfg = ExperimentConfig.from_dict(payload["config"])
    i_n, i_p, rep = payload["i_n"], payload["i_p"], payload["rep"]
    n, p = cfg.n_list[i_n], cfg.p_list[i_p]
    truth_sigma = build_truth(cfg.truth, p, cfg.master_seed)
    seed = derive_seed(cfg.master_seed, _CELL_TAG, i_n, i_p, rep)
    spec = make_process(cfg.process, truth_sigma, p, seed)
    z = simulate(spec, n)
    points = _estimate_cell(cfg, z, truth_sigma, spec, n)
    return {"i_n": i_n, "i_p": i_p, "rep": rep, "n": n, "p": p,
            "points": points}


def worker_count() -> int:
    """Worker pool size: COVTS_WORKERS if set, else available parallelism."""
    env = os.environ.get("COVTS_WORKERS", "").strip()
    if env:
        count = int(env)
        if count < 1:
            raise ValueError("COVTS_WORKERS must be a positive integer")
        return count
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig,
                   workers: int | None = None) -> ExperimentResult:
    """Run the full (n, p, replication) x grid sweep described by ``cfg``.

    Cells execute serially or on a process pool; the merged row order is
    by (n index, p index, replication, grid position) regardless of the
    execution schedule.  Per-point estimator failures are flagged in the
    metadata, not raised.
    """
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t_begin = time.perf_counter()
    if workers is None:
        workers = worker_count()
    payloads = [{"config": cfg.to_dict(), "i_n": i_n, "i_p": i_p, "rep": rep}
                for i_n in range(len(cfg.n_list))
                for i_p in range(len(cfg.p_list))
                for rep in range(cfg.replications)]
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, payloads, chunksize=1))
    else:
        cells = [_run_cell(pl) for pl in payloads]
    cells.sort(key=lambda c: (c["i_n"], c["i_p"], c["rep"]))
    rows, flags, runtimes = [], [], []
    for cell in cells:
        for g, fr, se, kept, rt_ms, flag in cell["points"]:
            rows.append((cell["n"], cell["p"], cell["rep"], g, fr, se, kept,
                         rt_ms))
            runtimes.append(rt_ms)
            if flag:
                flags.append({"n": cell["n"], "p": cell["p"],
                              "rep": cell["rep"], "grid_value": g,
                              "flag": flag})
    aggregate = _aggregate(cfg, rows)
    cfg_dict = cfg.to_dict()
    meta = {"config": cfg_dict,
            "config_hash": config_hash(cfg_dict),
            "seed": cfg.master_seed,
            "version": __version__,
            "started_at": started,
            "total_runtime_ms": (time.perf_counter() - t_begin) * 1e3,
            "cell_runtime_ms_mean": float(np.mean(runtimes)) if runtimes else 0.0,
            "flags": flags,
            "workers": workers}
    return ExperimentResult(rows=rows, aggregate=aggregate, meta=meta)


def _aggregate(cfg: ExperimentConfig, rows: list) -> list:
    grid = cfg.grid_values()
    agg = []
    for n in cfg.n_list:
        for p in cfg.p_list:
            entries = []
            for g in grid:
                sel = [r for r in rows
                       if r[0] == n and r[1] == p and r[3] == float(g)]
                fr = np.array([r[4] for r in sel])
                se = np.array([r[5] for r in sel])
                kept = np.array([r[6] for r in sel], dtype=float)
                ok = ~np.isnan(fr)
                count = max(int(np.sum(ok)), 1)
                entries.append({
                    "n": n, "p": p, "grid_value": float(g),
                    "mean_frob_risk": float(np.nanmean(fr)) if ok.any() else float("nan"),
                    "se_frob_risk": float(np.nanstd(fr, ddof=1) / np.sqrt(count))
                        if count > 1 else 0.0,
                    "mean_spectral_err": float(np.nanmean(se)) if ok.any() else float("nan"),
                    "se_spectral_err": float(np.nanstd(se, ddof=1) / np.sqrt(count))
                        if count > 1 else 0.0,
                    "mean_kept": float(np.mean(kept)),
                    "optimal": False})
            risks = [e["mean_frob_risk"] for e in entries]
            finite = [i for i, r in enumerate(risks) if np.isfinite(r)]
            if finite:
                best = min(finite, key=lambda i: risks[i])
                entries[best]["optimal"] = True
            agg.extend(entries)
    return agg


# ---------------------------------------------------------------------- #
# cross-validated threshold selection


@dataclass
class CVResult:
    """Cross-validation outcome: selected threshold and the score table."""

    u: float
    grid: np.ndarray
    scores: np.ndarray       # splits x grid
    mean_scores: np.ndarray


def cv_threshold(z: np.ndarray, grid, splits: int, seed: int) -> CVResult:
    """Temporal-block cross-validation for the threshold level.

    Each split cuts the time axis into two contiguous blocks at a uniform
    point of the middle third (contiguity respects the serial dependence;
    interleaved folds would leak it).  The first-block sample covariance
    is thresholded at each grid value and scored against the second-block
    sample covariance by squared Frobenius distance; the minimizer of the
    mean score is selected, ties broken toward the larger (sparser)
    threshold.
    """
    z = np.asarray(z, dtype=float)
    n = z.shape[1]
    if n < 4:
        raise ValueError("cross-validation needs n >= 4")
    if splits < 1:
        raise ValueError("splits must be >= 1")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be nonempty and strictly increasing")
    from .rng import make_generator
    rng = make_generator(derive_seed(seed, _CV_TAG))
    lo, hi = n // 3, (2 * n) // 3
    if lo < 1:
        lo = 1
    if hi <= lo:
        hi = lo + 1
    scores = np.empty((splits, grid.size))
    for s in range(splits):
        cut = int(rng.integers(lo, hi))
        s1 = sample_cov(z[:, :cut])
        s2 = sample_cov(z[:, cut:])
        for j, u in enumerate(grid):
            t_mat = threshold(s1, u).matrix
            scores[s, j] = np.sum((t_mat - s2) ** 2)
    mean_scores = scores.mean(axis=0)
    best = mean_scores.min()
    # ties toward larger u: last index achieving the minimum
    j_sel = int(np.flatnonzero(mean_scores <= best + 0.0)[-1])
    return CVResult(u=float(grid[j_sel]), grid=grid, scores=scores,
                    mean_scores=mean_scores)


# ---------------------------------------------------------------------- #
# trend verdicts


@dataclass
class TrendVerdict:
    claim: str
    statistic: float
    detail: dict
    passed: bool


def _min_risk_by_n(result: ExperimentResult) -> dict:
    """Empirically optimal mean risk per sample size (single p assumed)."""
    out = {}
    for a in result.aggregate:
        if a["optimal"]:
            out[a["n"]] = a["mean_frob_risk"]
    return out


def _bootstrap_min_risk(result: ExperimentResult, n: int, p: int,
                        nboot: int, seed: int, level: float) -> tuple:
    """Percentile interval for the grid-minimized mean Frobenius risk."""
    from .rng import make_generator
    rows = [r for r in result.rows if r[0] == n and r[1] == p]
    reps = sorted({r[2] for r in rows})
    grid = sorted({r[3] for r in rows})
    risk = np.full((len(reps), len(grid)), np.nan)
    rep_ix = {rep: i for i, rep in enumerate(reps)}
    g_ix = {g: j for j, g in enumerate(grid)}
    for r in rows:
        risk[rep_ix[r[2]], g_ix[r[3]]] = r[4]
    rng = make_generator(seed)
    stats = np.empty(nboot)
    for b in range(nboot):
        pick = rng.integers(0, len(reps), size=len(reps))
        stats[b] = np.nanmin(np.nanmean(risk[pick], axis=0))
    alpha = (1.0 - level) / 2.0
    return (float(np.quantile(stats, alpha)),
            float(np.quantile(stats, 1.0 - alpha)))


def trend_report(results: list, claim: str, band: tuple | None = None,
                 nboot: int = 400, seed: int = 20240, level: float = 0.90) -> TrendVerdict:
    """Evaluate a qualitative claim over one or more experiment results.

    Claims
    ------
    ``risk_slope_vs_n``
        Log-log regression slope of the empirically optimal mean Frobenius
        risk against n (one result, several n); ``band = (target, tol)``
        passes when ``|slope - target| <= tol``.  The detail dict carries a
        bootstrap standard error over replications.
    ``dependence_risk_ordering``
        Results ordered weakest to strongest dependence: passes when the
        grid-minimized risks strictly increase and consecutive bootstrap
        intervals at ``level`` are disjoint.
    ``optimal_threshold_ordering``
        Results in the caller's intended order: passes when the
        empirically optimal grid values are non-increasing.
    """
    if claim == "risk_slope_vs_n":
        (result,) = results
        by_n = _min_risk_by_n(result)
        ns = sorted(by_n)
        if len(ns) < 2:
            raise ValueError("slope claim needs at least two sample sizes")
        x = np.log(np.array(ns, dtype=float))
        y = np.log(np.array([by_n[n] for n in ns]))
        slope = float(np.polyfit(x, y, 1)[0])
        p = result.meta["config"]["p_list"][0]
        boot_slopes = _bootstrap_slope(result, ns, p, nboot, seed)
        detail = {"slope": slope, "bootstrap_se": float(np.std(boot_slopes)),
                  "risks": {int(n): by_n[n] for n in ns}}
        passed = True
        if band is not None:
            passed = abs(slope - band[0]) <= band[1]
        return TrendVerdict(claim=claim, statistic=slope, detail=detail,
                            passed=passed)
    if claim == "dependence_risk_ordering":
        stats, intervals = [], []
        for k, res in enumerate(results):
            n = res.meta["config"]["n_list"][0]
            p = res.meta["config"]["p_list"][0]
            _, risk = res.optimal_risk(n, p)
            stats.append(risk)
            intervals.append(_bootstrap_min_risk(res, n, p, nboot,
                                                 derive_seed(seed, k), level))
        increasing = all(stats[k] < stats[k + 1] for k in range(len(stats) - 1))
        disjoint = all(intervals[k][1] < intervals[k + 1][0]
                       for k in range(len(stats) - 1))
        return TrendVerdict(claim=claim, statistic=float(stats[-1] - stats[0]),
                            detail={"risks": stats, "intervals": intervals},
                            passed=bool(increasing and disjoint))
    if claim == "optimal_threshold_ordering":
        us = []
        for res in results:
            n = res.meta["config"]["n_list"][0]
            p = res.meta["config"]["p_list"][0]
            u, _ = res.optimal_risk(n, p)
            us.append(u)
        ok = all(us[k] >= us[k + 1] for k in range(len(us) - 1))
        return TrendVerdict(claim=claim, statistic=float(us[0] - us[-1]),
                            detail={"optimal_thresholds": us}, passed=bool(ok))
    raise ValueError(f"unknown claim {claim!r}")


def _bootstrap_slope(result: ExperimentResult, ns: list, p: int,
                     nboot: int, seed: int) -> np.ndarray:
    from .rng import make_generator
    tables = {}
    for n in ns:
        rows = [r for r in result.rows if r[0] == n and r[1] == p]
        reps = sorted({r[2] for r in rows})
        grid = sorted({r[3] for r in rows})
        risk = np.full((len(reps), len(grid)), np.nan)
        rep_ix = {rep: i for i, rep in enumerate(reps)}
        g_ix = {g: j for j, g in enumerate(grid)}
        for r in rows:
            risk[rep_ix[r[2]], g_ix[r[3]]] = r[4]
        tables[n] = risk
    rng = make_generator(seed)
    x = np.log(np.array(ns, dtype=float))
    slopes = np.empty(nboot)
    for b in range(nboot):
        y = []
        for n in ns:
            risk = tables[n]
            pick = rng.integers(0, risk.shape[0], size=risk.shape[0])
            y.append(np.nanmin(np.nanmean(risk[pick], axis=0)))
        slopes[b] = np.polyfit(x, np.log(np.array(y)), 1)[0]
    return slopes
