"""Rate-curve reports: delimited tables plus rendered figures.

``emit_rate_curves`` writes, for one (profile, truth) pair, a CSV of the
rate functions over a logarithmic threshold grid together with an SVG
line plot (log-log axes, legend, solved-threshold markers).  The
``fig2_preset`` sweep emits one curve pair per (length scale, dependence
regime) combination on a shared random-site geometry, recording its
constant conventions and solved thresholds in a JSON summary.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .covmodels import rational_quadratic_cov, smallness, uniform_sites
from .harness import config_hash
from .rates import (G, G_tilde, H, NonMonotone, NoSignChange, RateProfile,
                    optimal_threshold_curve, risk_upper_bound, solve_u_circ,
                    solve_u_dagger, solve_u_diamond)
from .rng import derive_seed

_FIG_SITES_TAG = 871


def _try_solve(solve, *args):
    try:
        return solve(*args)
    except (NoSignChange, NonMonotone):
        return None


def rate_curve_table(prof: RateProfile, sigma: np.ndarray,
                     grid_size: int = 200) -> dict:
    """Evaluate (u, D, H, G, G_tilde, bound) on a log grid plus markers.

    The markers are the solved thresholds: ``u_diamond`` (H = G),
    ``u_dagger`` (D = H), ``u_circ`` (D = G_tilde on [n^-1/2, u_diamond])
    and ``u_natural`` (minimizer of max(D, H, G_tilde) above n^-1/2);
    markers whose equations have no crossing on their interval are None.
    """
    n = float(prof.n)
    lo = 1.0 / np.sqrt(n) / 10.0
    hi = 2.0 * max(float(np.max(np.abs(sigma))), 1.0)
    us = np.exp(np.linspace(np.log(lo), np.log(hi), grid_size))
    cols = {"u": us,
            "D": np.array([smallness(sigma, u).D for u in us]),
            "H": np.array([H(u, prof) for u in us]),
            "G": np.array([G(u, prof) for u in us]),
            "G_tilde": np.array([G_tilde(u, prof) for u in us]),
            "bound": np.array([risk_upper_bound(u, prof, sigma) for u in us])}
    markers = {"u_diamond": _try_solve(solve_u_diamond, prof),
               "u_dagger": _try_solve(solve_u_dagger, prof, sigma),
               "u_circ": _try_solve(solve_u_circ, prof, sigma),
               "u_natural": _try_solve(optimal_threshold_curve, prof, sigma)}
    return {"columns": cols, "markers": markers}


def write_rate_curve_csv(path, table: dict) -> None:
    """CSV with marker header comments and one row per grid point."""
    cols = table["columns"]
    names = ["u", "D", "H", "G", "G_tilde", "bound"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for name, value in table["markers"].items():
            fh.write(f"# {name}={'' if value is None else repr(value)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(len(cols["u"])):
            writer.writerow([repr(float(cols[c][i])) for c in names])


_MARKER_STYLE = {"u_diamond": ("D", "tab:purple"),
                 "u_dagger": ("^", "tab:red"),
                 "u_circ": ("o", "tab:green"),
                 "u_natural": ("*", "black")}


def render_rate_curve_svg(path, table: dict, title: str = "") -> None:
    """Log-log line plot of the rate functions with threshold markers."""
    cols = table["columns"]
    us = cols["u"]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.loglog(us, cols["D"], label="D(u)", color="tab:blue")
    ax.loglog(us, cols["H"], label="H(u)", color="tab:orange")
    ax.loglog(us, cols["G"], label="G(u)", color="tab:green", ls="--")
    ax.loglog(us, cols["G_tilde"], label="G~(u)", color="tab:olive", ls=":")
    ax.loglog(us, cols["bound"], label="risk bound", color="tab:red",
              lw=2, alpha=0.7)
    env = np.maximum(cols["D"], np.maximum(cols["H"], cols["G_tilde"]))
    for name, value in table["markers"].items():
        if value is None:
            continue
        style, color = _MARKER_STYLE[name]
        ax.axvline(value, color=color, lw=0.8, alpha=0.5)
        y = np.interp(value, us, env)
        ax.plot([value], [y], marker=style, color=color, ms=8, ls="none",
                label=name.replace("_", " "))
    ax.set_xlabel("threshold u")
    ax.set_ylabel("rate value (unit constants)")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, ncol=2)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_rate_curves(prof: RateProfile, sigma: np.ndarray, out_base,
                     title: str = "", grid_size: int = 200) -> dict:
    """Write ``<out_base>.csv`` and ``<out_base>.svg`` for one profile.

    Returns the marker dictionary plus the written paths.  I/O failures
    propagate with the offending path in the message.
    """
    table = rate_curve_table(prof, sigma, grid_size=grid_size)
    csv_path = f"{out_base}.csv"
    svg_path = f"{out_base}.svg"
    try:
        write_rate_curve_csv(csv_path, table)
        render_rate_curve_svg(svg_path, table, title=title)
    except OSError as exc:
        raise OSError(f"failed writing rate curves near {out_base!r}: "
                      f"{exc}") from exc
    return {"csv": csv_path, "svg": svg_path, "markers": table["markers"]}


def fig2_preset(out_dir, master_seed: int = 2024, n: int = 100, p: int = 200,
                K: float = 4.0, q: float = 4.0,
                alphas: tuple = (0.3, 0.125),
                tau_powers: tuple = (1 / 3, 1 / 6, 1 / 9),
                grid_size: int = 200) -> dict:
    """Rate-of-convergence illustration over spatial/temporal regimes.

    Builds one rational-quadratic truth per length scale ``tau = p**power``
    on a shared uniform-site draw, evaluates the rate curves for each
    dependence exponent, and writes a (CSV, SVG) pair per combination plus
    a ``fig2_meta.json`` recording the unit-constant convention, the seed
    and every solved threshold.
    """
    os.makedirs(out_dir, exist_ok=True)
    sites = uniform_sites(p, np.sqrt(p),
                          seed=derive_seed(master_seed, _FIG_SITES_TAG, p))
    summary = {"preset": "fig2", "version": __version__,
               "master_seed": master_seed,
               "n": n, "p": p, "K": K, "q": q,
               "constants": "all unspecified rate constants set to 1",
               "combos": []}
    files = []
    matplotlib.rcParams["svg.hashsalt"] = str(master_seed)
    for alpha in alphas:
        for power in tau_powers:
            tau = float(p) ** power
            sigma = rational_quadratic_cov(sites, K, tau)
            prof = RateProfile(n=n, p=p, q=q, alpha=alpha)
            regime = prof.regime
            base = os.path.join(
                out_dir, f"fig2_alpha{alpha:g}_taupow{power:.4f}")
            title = (f"alpha={alpha:g} ({regime}), tau=p^{power:.3f}"
                     f"={tau:.2f}, n={n}, p={p}")
            emitted = emit_rate_curves(prof, sigma, base, title=title,
                                       grid_size=grid_size)
            files.extend([emitted["csv"], emitted["svg"]])
            summary["combos"].append({
                "alpha": alpha, "tau_power": power, "tau": tau,
                "regime": regime,
                "markers": {k: v for k, v in emitted["markers"].items()},
                "csv": os.path.basename(emitted["csv"]),
                "svg": os.path.basename(emitted["svg"])})
    summary["hash"] = config_hash({k: v for k, v in summary.items()
                                   if k != "combos"})
    meta_path = os.path.join(out_dir, "fig2_meta.json")
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary["files"] = files
    summary["meta_path"] = meta_path
    return summary


def fig2_threshold_orderings(summary: dict) -> dict:
    """Spatial- and temporal-dependence orderings of the fig2 thresholds.

    Checks that the optimal threshold does not decrease as the spatial
    length scale shrinks (more thresholdable truth needs a larger u) and
    that the strong-dependence regime needs at least as large a threshold
    as the weak regime at every length scale.
    """
    combos = summary["combos"]
    by_key = {(c["alpha"], round(c["tau_power"], 6)): c["markers"]["u_natural"]
              for c in combos}
    alphas = sorted({c["alpha"] for c in combos}, reverse=True)  # weak first
    # ascending powers = shortest length scale first = largest threshold
    powers = sorted({round(c["tau_power"], 6) for c in combos})
    spatial_ok = all(
        by_key[(a, powers[i])] >= by_key[(a, powers[i + 1])]
        for a in alphas for i in range(len(powers) - 1))
    temporal_ok = True
    if len(alphas) == 2:
        weak, strong = alphas[0], alphas[1]
        temporal_ok = all(by_key[(strong, pw)] >= by_key[(weak, pw)]
                          for pw in powers)
    return {"spatial_ok": bool(spatial_ok), "temporal_ok": bool(temporal_ok),
            "thresholds": {f"alpha={a},taupow={pw}": by_key[(a, pw)]
                           for a in alphas for pw in powers}}
