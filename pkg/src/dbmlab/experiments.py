"""Experiment implementations behind the command-line runner.

Every experiment is organized as a deterministic map over unit indices
(samples or seeds) followed by an order-fixed reduction, so results are
byte-identical regardless of how the units are distributed over workers.
The per-unit RNG is derived from the master seed and the unit index with a
counter-based spawn key; any conforming implementation can reproduce the
streams from (seed, index) alone.
"""

import numpy as np

from .ensembles import EnsembleSpec, eigenvalues, matrix_flow, sample_generalized_wigner
from .errors import ConfigurationError
from .dynamics import (
    coupled_field,
    evolve_parabolic,
    homogenization_residual,
    regularity_check,
    run_coupled,
    run_dbm,
    synthetic_field,
)
from .kernel import (
    HeatKernelAntiderivative,
    apply_K,
    cheb_P,
    cheb_P_table,
    heat_kernel_grid,
    kernel_bound_check,
)
from .semicircle import cdf, rigidity_report, semicircle_quadrature, typical_locations
from .stats import (
    LinearStatistic,
    characteristic_fn_from_values,
    clt_parameters,
    fourier_cutoff,
    gap_statistics,
    linear_statistic,
    loop_residual_from_samples,
    product_observable,
    q_sum,
    repulsion_fit,
)

__all__ = ["EXPERIMENTS", "unit_rng", "run_experiment"]


def unit_rng(seed, index):
    """Independent generator for one unit, reproducible from (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _ks_distance(values, n):
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    f = cdf(values)
    return float(max(np.max(np.abs(f - grid_hi)), np.max(np.abs(f - grid_lo))))


# --- semicircle / rigidity ------------------------------------------------


def _sample_goe_spectrum(cfg, k):
    spec = EnsembleSpec(n=cfg["n"], kind="goe")
    return eigenvalues(sample_generalized_wigner(spec, unit_rng(cfg["seed"], k))).values


def _semicircle_unit(cfg, k, table):
    lam = _sample_goe_spectrum(cfg, k)
    return {"replica": k, "ks": _ks_distance(lam, cfg["n"])}


def _semicircle_reduce(cfg, rows):
    ks = np.array([r["ks"] for r in rows])
    return {"mean_ks": float(ks.mean()), "max_ks": float(ks.max()), "n_samples": len(rows)}


def _rigidity_unit(cfg, k, table):
    lam = _sample_goe_spectrum(cfg, k)
    rep = rigidity_report(lam, table, cfg["xi"])
    return {
        "replica": k,
        "n_violations": int(rep.violations.size),
        "max_scaled_dev": rep.max_scaled_dev,
    }


def _rigidity_reduce(cfg, rows):
    viol = np.array([r["n_violations"] > 0 for r in rows])
    return {
        "violation_rate": float(viol.mean()),
        "mean_max_scaled_dev": float(np.mean([r["max_scaled_dev"] for r in rows])),
        "xi": cfg["xi"],
        "n_samples": len(rows),
    }


# --- kernel checks ----------------------------------------------------------


def _kernel_check_unit(cfg, k, table):
    t = cfg["t"]
    bounds = kernel_bound_check(t, table, cfg["alpha"])
    xs = np.linspace(-1.5, 1.5, 50)
    eig_err = 0.0
    for deg in range(9):
        f = lambda z, deg=deg: cheb_P(deg, z)
        for x in xs:
            eig_err = max(eig_err, abs(apply_K(f, x, cfg["quad_nodes"]) - 0.5 * deg * cheb_P(deg, x)))
    qx, qw = semicircle_quadrature(cfg["quad_nodes"])
    stat_err = float(np.max(np.abs(heat_kernel_grid(t, xs, qx) @ qw - 1.0)))
    series_err = 0.0
    ys = np.linspace(-1.4, 1.4, 50)
    px = cheb_P_table(300, xs)
    py = cheb_P_table(300, ys)
    for tt in (0.2, 1.0):
        closed = heat_kernel_grid(tt, xs, ys)
        decay = np.exp(-0.5 * tt * np.arange(301))
        series = np.einsum("m,mi,mj->ij", decay, px, py)
        series_err = max(series_err, float(np.max(np.abs(closed - series))))
    return {
        "replica": k,
        "c_upper": bounds.c_upper,
        "c_rowsum": bounds.c_rowsum,
        "c_deriv": bounds.c_deriv,
        "eigenrelation_err": eig_err,
        "stationarity_err": stat_err,
        "series_vs_closed_err": series_err,
    }


def _kernel_check_reduce(cfg, rows):
    r = rows[0]
    return {key: r[key] for key in
            ("c_upper", "c_rowsum", "c_deriv", "eigenrelation_err",
             "stationarity_err", "series_vs_closed_err")}


# --- homogenization ---------------------------------------------------------


def _homogenization_unit(cfg, k, table):
    n = cfg["n"]
    rng = unit_rng(cfg["seed"], k)
    t0 = float(n) ** (-cfg["tau0"]) / 2.0
    t = float(n) ** (-cfg["tau"])
    x0 = eigenvalues(sample_generalized_wigner(EnsembleSpec(n=n, kind="bernoulli"), rng)).values
    y0 = eigenvalues(sample_generalized_wigner(EnsembleSpec(n=n, kind="goe"), rng)).values
    xt, yt = run_coupled(x0, y0, t, cfg["dt_scale"] / n, rng, record_times=[t0])
    rep = homogenization_residual(xt, yt, t0, t, cfg["e"], cfg["delta1"], table)
    return {
        "replica": k,
        "max_residual": rep.max_residual,
        "median_residual": rep.median_residual,
        "window_size": int(rep.indices.size),
        "residuals": [float(v) for v in rep.residuals],
    }


def _homogenization_reduce(cfg, rows):
    pooled = np.concatenate([np.asarray(r["residuals"]) for r in rows])
    return {
        "median_bulk_residual": float(np.median(pooled)),
        "median_max_residual": float(np.median([r["max_residual"] for r in rows])),
        "n_seeds": len(rows),
        "n": cfg["n"],
        "tau": cfg["tau"],
        "tau0": cfg["tau0"],
        "e": cfg["e"],
        "delta1": cfg["delta1"],
    }


# --- parabolic decay ---------------------------------------------------------


def _decay_unit(cfg, k, table):
    n = cfg["n"]
    field = synthetic_field(table)
    v = np.zeros(n)
    v[0], v[1] = 1.0, -1.0
    l1 = 2.0 / n
    checks = np.linspace(0.1, 1.0, 10)
    prev = 0.0
    constant = 0.0
    conservation = 0.0
    monotone_ok = True
    for s in checks:
        rep = evolve_parabolic(v, field, prev, s, cfg["dt"])
        v = rep.v
        prev = s
        conservation = max(conservation, abs(rep.mass_drift))
        monotone_ok = monotone_ok and np.all(np.diff(rep.linf_path) <= 1e-12)
        constant = max(constant, s**3 * float(np.max(np.abs(v))) / l1)
    return {
        "replica": k,
        "decay_constant": constant,
        "mass_drift": conservation,
        "linf_monotone": bool(monotone_ok),
    }


def _decay_reduce(cfg, rows):
    r = rows[0]
    return {
        "decay_constant": r["decay_constant"],
        "mass_drift": r["mass_drift"],
        "linf_monotone": r["linf_monotone"],
        "n": cfg["n"],
    }


# --- regularity --------------------------------------------------------------


def _regularity_unit(cfg, k, table):
    n = cfg["n"]
    rng = unit_rng(cfg["seed"], k)
    t = float(n) ** (-cfg["tau"])
    t0 = float(n) ** (-cfg["tau0"]) / 2.0
    x0 = eigenvalues(sample_generalized_wigner(EnsembleSpec(n=n, kind="bernoulli"), rng)).values
    y0 = eigenvalues(sample_generalized_wigner(EnsembleSpec(n=n, kind="goe"), rng)).values
    frames = np.linspace(0.0, t, cfg["n_frames"])
    dt = cfg["dt_scale"] / n
    xt, yt = run_coupled(x0, y0, t, dt, rng, record_times=frames)
    floor = 0.5 * np.sqrt(2.0 * dt / n)
    field = coupled_field(xt, yt, cfg["eps"], t0, gap_floor=floor)
    rep = regularity_check(field, n // 2, t, rho_test=cfg["rho_test"])
    return {
        "replica": k,
        "worst_ratio": rep.worst_ratio,
        "rho_min": rep.rho_min,
        "regular": bool(rep.regular),
    }


def _regularity_reduce(cfg, rows):
    return {
        "regular_fraction": float(np.mean([r["regular"] for r in rows])),
        "median_rho_min": float(np.median([r["rho_min"] for r in rows])),
        "rho_test": cfg["rho_test"],
        "n_seeds": len(rows),
    }


# --- gaps and repulsion -------------------------------------------------------


def _gaps_unit(cfg, k, table):
    lam = _sample_goe_spectrum(cfg, k)
    return {"replica": k, "values": [float(v) for v in lam]}


def _gaps_reduce(cfg, rows):
    table = typical_locations(cfg["n"])
    hist = gap_statistics([np.asarray(r["values"]) for r in rows], table, cfg["alpha"])
    return {
        "mean_gap": hist.mean,
        "n_gaps": hist.n_gaps,
        "hist_mass_total": float(np.sum(hist.mass)),
        "bin_edges": [float(v) for v in hist.bin_edges],
        "mass": [float(v) for v in hist.mass],
        "n_samples": len(rows),
    }


def _repulsion_unit(cfg, k, table):
    n = cfg["n"]
    rng = unit_rng(cfg["seed"], k)
    idx = n // 2
    if cfg["path"] == "exact":
        lam = _sample_goe_spectrum(cfg, k)
        return {"replica": k, "gap": float(lam[idx + 1] - lam[idx])}
    spec = EnsembleSpec(n=n, kind="goe")
    lam0 = eigenvalues(sample_generalized_wigner(spec, rng)).values
    out = {"replica": k}
    for label, scale in (("gap", 1.0), ("gap_dt_half", 0.5)):
        traj = run_dbm(lam0, cfg["t_flow"], scale * cfg["dt_scale"] / n,
                          unit_rng(cfg["seed"], k + 10**6))
        lam = traj.states[-1]
        out[label] = float(lam[idx + 1] - lam[idx])
    return out


def _repulsion_reduce(cfg, rows):
    n = cfg["n"]
    eps_grid = np.asarray(cfg["eps_grid"])
    probe = repulsion_fit(np.array([r["gap"] for r in rows]), n, eps_grid)
    out = {
        "slope": probe.slope,
        "prob": [float(p) for p in probe.prob],
        "eps_grid": [float(e) for e in eps_grid],
        "excluded": [bool(b) for b in probe.excluded],
        "path": cfg["path"],
        "n_samples": len(rows),
    }
    if cfg["path"] == "dbm":
        half = repulsion_fit(np.array([r["gap_dt_half"] for r in rows]), n, eps_grid)
        out["slope_dt_half"] = half.slope
    return out


# --- linear statistics --------------------------------------------------------


_STAT_CACHE = {}


def _clt_statistic(cfg, table):
    key = (cfg["f"], cfg["n"], cfg.get("tau"), cfg.get("e"))
    if key in _STAT_CACHE:
        return _STAT_CACHE[key]
    stat = _build_clt_statistic(cfg, table)
    _STAT_CACHE[key] = stat
    return stat


def _build_clt_statistic(cfg, table):
    kind = cfg["f"]
    if kind == "x":
        one = lambda x: np.ones_like(np.asarray(x, dtype=np.float64))
        return LinearStatistic(
            f=lambda x: np.asarray(x, dtype=np.float64),
            df=one,
            d2f=lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
            support=(-4.0, 4.0),
            name="x",
        )
    if kind == "x2":
        return LinearStatistic(
            f=lambda x: np.asarray(x, dtype=np.float64) ** 2,
            df=lambda x: 2.0 * np.asarray(x, dtype=np.float64),
            d2f=lambda x: np.full_like(np.asarray(x, dtype=np.float64), 2.0),
            support=(-4.0, 4.0),
            name="x^2",
        )
    if kind == "meso":
        t = float(cfg["n"]) ** (-cfg["tau"])
        p = HeatKernelAntiderivative(t, cfg["e"], table)
        return LinearStatistic(f=p, df=p.deriv, d2f=p.second_deriv, support=(-4.0, 4.0),
                               name="kernel_antiderivative")
    raise ConfigurationError(f"unknown test function {kind!r}")


def _clt_unit(cfg, k, table):
    stat = _clt_statistic(cfg, table)
    lam = _sample_goe_spectrum(cfg, k)
    return {"replica": k, "s_n": linear_statistic(lam, stat)}


def _clt_reduce(cfg, rows):
    table = typical_locations(cfg["n"])
    stat = _clt_statistic(cfg, table)
    params = clt_parameters(stat, beta=1.0, n=cfg["n"])
    s_vals = np.array([r["s_n"] for r in rows])
    lam_grid = np.asarray(cfg["lambda_grid"], dtype=np.float64)
    _, z_hat, z_se = characteristic_fn_from_values(s_vals, lam_grid)
    z_pred = np.exp(-0.5 * lam_grid**2 * params.sigma2 + 1j * lam_grid * params.delta)
    return {
        "f": cfg["f"],
        "sigma2_analytic": params.sigma2,
        "delta_analytic": params.delta,
        "eps_f": params.eps_f,
        "mean_empirical": float(s_vals.mean()),
        "var_empirical": float(s_vals.var(ddof=1)),
        "lambda_grid": [float(v) for v in lam_grid],
        "z_abs_err": [float(abs(a - b)) for a, b in zip(z_hat, z_pred)],
        "z_stderr": [float(v) for v in z_se],
        "n_samples": len(rows),
    }


# --- loop equation --------------------------------------------------------------


def _loop_unit(cfg, k, table):
    lam = _sample_goe_spectrum(cfg, k)
    z = complex(cfg["z_re"], cfg["z_im"])
    s = np.mean(1.0 / (z - lam))
    return {"replica": k, "s_re": float(s.real), "s_im": float(s.imag)}


def _loop_reduce(cfg, rows):
    z = complex(cfg["z_re"], cfg["z_im"])
    s_vals = np.array([complex(r["s_re"], r["s_im"]) for r in rows])
    rep = loop_residual_from_samples(s_vals, z, beta=1.0, n=cfg["n"])
    return {
        "residual_abs": float(abs(rep.residual)),
        "stderr": rep.stderr,
        "ratio": float(abs(rep.residual) / rep.stderr),
        "precision_warning": rep.precision_warning,
        "n": cfg["n"],
        "z": [cfg["z_re"], cfg["z_im"]],
        "n_samples": len(rows),
    }


# --- universality -----------------------------------------------------------------


def _universality_observable(cfg):
    l_x, l_y = cfg["obs_lx"], cfg["obs_ly"]
    fx = lambda x: np.clip(1.0 - (np.asarray(x, dtype=np.float64) / l_x) ** 2, 0.0, None) ** 3
    fy = lambda y: np.clip(1.0 - (np.asarray(y, dtype=np.float64) / l_y) ** 2, 0.0, None) ** 3
    base = product_observable(fx, fy, l_y=l_y, x_support=l_x)
    return fourier_cutoff(base, cfg["m"])


def _universality_unit(cfg, k, table):
    n = cfg["n"]
    rng = unit_rng(cfg["seed"], k)
    obs = _OBS_CACHE.setdefault(_obs_key(cfg), _universality_observable(cfg))
    t = float(n) ** (-cfg["tau"]) if cfg["tau"] > 0 else 0.0
    h = sample_generalized_wigner(EnsembleSpec(n=n, kind="bernoulli"), rng)
    if t > 0:
        h = matrix_flow(h, t, rng)
    val_a = q_sum(eigenvalues(h), cfg["e"], obs)
    g = sample_generalized_wigner(EnsembleSpec(n=n, kind="goe"), rng)
    val_b = q_sum(eigenvalues(g), cfg["e"], obs)
    return {"replica": k, "q_a": float(val_a), "q_b": float(val_b)}


_OBS_CACHE = {}


def _obs_key(cfg):
    return (cfg["obs_lx"], cfg["obs_ly"], cfg["m"])


def _universality_reduce(cfg, rows):
    a = np.array([r["q_a"] for r in rows])
    b = np.array([r["q_b"] for r in rows])
    se = float(np.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size))
    z = (float(a.mean()) - float(b.mean())) / se if se > 0 else 0.0
    return {
        "mean_a": float(a.mean()),
        "mean_b": float(b.mean()),
        "stderr": se,
        "z_score": float(z),
        "n_samples": len(rows),
        "m": cfg["m"],
    }


# --- registry ---------------------------------------------------------------------

# name -> (defaults, unit_count_key, unit_fn, reduce_fn, needs_table)
EXPERIMENTS = {
    "semicircle": (
        {"n": 1000, "n_samples": 50, "xi": 0.3},
        "n_samples", _semicircle_unit, _semicircle_reduce, False,
    ),
    "rigidity": (
        {"n": 1000, "n_samples": 50, "xi": 0.3},
        "n_samples", _rigidity_unit, _rigidity_reduce, True,
    ),
    "kernel-check": (
        {"n": 200, "n_samples": 1, "t": 0.2, "alpha": 0.1, "quad_nodes": 4000},
        "n_samples", _kernel_check_unit, _kernel_check_reduce, True,
    ),
    "homogenization": (
        {"n": 500, "n_samples": 20, "tau": 0.2, "tau0": 0.25, "e": 0.2,
         "delta1": 0.5, "dt_scale": 0.2},
        "n_samples", _homogenization_unit, _homogenization_reduce, True,
    ),
    "decay": (
        {"n": 500, "n_samples": 1, "dt": 2e-3},
        "n_samples", _decay_unit, _decay_reduce, True,
    ),
    "regularity": (
        {"n": 300, "n_samples": 20, "tau": 0.2, "tau0": 0.25, "eps": None,
         "rho_test": 0.5, "n_frames": 501, "dt_scale": 0.2},
        "n_samples", _regularity_unit, _regularity_reduce, True,
    ),
    "gaps": (
        {"n": 400, "n_samples": 500, "alpha": 0.1},
        "n_samples", _gaps_unit, _gaps_reduce, False,
    ),
    "repulsion": (
        {"n": 200, "n_samples": 5000, "path": "exact", "t_flow": 0.5,
         "dt_scale": 0.2, "eps_grid": [0.05, 0.0794, 0.126, 0.2, 0.315, 0.5]},
        "n_samples", _repulsion_unit, _repulsion_reduce, False,
    ),
    "clt": (
        {"n": 400, "n_samples": 2000, "f": "x", "tau": 0.3, "e": 0.2,
         "lambda_grid": [0.5, 1.0]},
        "n_samples", _clt_unit, _clt_reduce, True,
    ),
    "loop": (
        {"n": 400, "n_samples": 2000, "z_re": 0.2, "z_im": 0.1},
        "n_samples", _loop_unit, _loop_reduce, False,
    ),
    "universality": (
        {"n": 400, "n_samples": 2000, "tau": 0.1, "e": 0.2, "m": 2.0,
         "obs_lx": 3.0, "obs_ly": 4.0},
        "n_samples", _universality_unit, _universality_reduce, True,
    ),
}


def run_experiment(cfg, map_chunks):
    """Run one experiment: cfg is a fully-resolved parameter dict, and
    map_chunks applies a chunk function over index ranges (serially or in a
    pool) and returns the concatenated per-unit rows in index order."""
    name = cfg["experiment"]
    defaults, count_key, unit_fn, reduce_fn, needs_table = EXPERIMENTS[name]
    if cfg["experiment"] == "regularity" and cfg.get("eps") is None:
        cfg = dict(cfg)
        cfg["eps"] = float(cfg["n"]) ** (-6.0)
    table = typical_locations(cfg["n"]) if needs_table else None
    n_units = int(cfg[count_key])
    rows = map_chunks(cfg, n_units, unit_fn, table)
    summary = reduce_fn(cfg, rows)
    return rows, summary
