"""Command-line experiment runner.

    dbmlab <experiment> --config path.json [--seed S] [--n N] [--tau T]
           [--out DIR] [--workers W] [--assert] [--verify]

A run writes manifest.json (config echo, versions, wall time, artifact
checksums), rows.csv (one row per sample/seed) and summary.json into the
output directory.  summary.json is a deterministic function of the config:
replica streams are derived from (seed, unit index), partial results are
merged in index order, and no timing information enters the summary.
--assert exits nonzero when the experiment's threshold check fails;
--verify recomputes the checksums of an existing run instead of rerunning.
"""

import argparse
import csv
import hashlib
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError
from .experiments import EXPERIMENTS, run_experiment

_GLOBAL_DEFAULTS = {"seed": 1, "out": "runs", "workers": 1}

# summary key checked in --assert mode: (key, comparator, bound)
_ASSERTIONS = {
    "semicircle": ("mean_ks", "<=", 0.02),
    "rigidity": ("violation_rate", "<=", 0.05),
    "kernel-check": ("eigenrelation_err", "<=", 1e-3),
    "homogenization": ("median_bulk_residual", "<=", 0.5),
    "decay": ("decay_constant", "<=", 50.0),
    "regularity": ("regular_fraction", ">=", 0.9),
    "gaps": ("mean_gap", "within", (1.0, 0.02)),
    "repulsion": ("slope", "within", (2.0, 0.3)),
    "clt": ("var_empirical", None, None),  # criterion depends on f; not asserted here
    "loop": ("ratio", "<=", 3.0),
    "universality": ("z_score", "abs<=", 3.0),
}


def resolve_config(experiment, file_cfg, overrides):
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}")
    defaults, _, _, _, _ = EXPERIMENTS[experiment]
    cfg = dict(_GLOBAL_DEFAULTS)
    cfg.update(defaults)
    cfg.update({k: v for k, v in (file_cfg or {}).items() if k != "experiment"})
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    cfg["experiment"] = experiment
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["n"] < 2:
        raise ConfigurationError("n must be >= 2")
    if cfg.get("n_samples", 1) < 1:
        raise ConfigurationError("n_samples must be >= 1")
    tau = cfg.get("tau")
    if tau is not None and not 0.0 < tau <= 1.0 and cfg["experiment"] != "universality":
        raise ConfigurationError("tau must lie in (0, 1]")
    e = cfg.get("e")
    if e is not None and abs(e) >= 2.0:
        raise ConfigurationError("energy must satisfy |E| < 2")
    if cfg["workers"] < 1:
        raise ConfigurationError("workers must be >= 1")


_CHUNK_STATE = {}


def _chunk_worker(args):
    cfg, lo, hi = args
    unit_fn, table = _CHUNK_STATE["unit_fn"], _CHUNK_STATE["table"]
    return [unit_fn(cfg, k, table) for k in range(lo, hi)]


def _init_chunk_state(experiment, table):
    # re-resolve the unit function by experiment name inside the worker
    _, _, unit_fn, _, _ = EXPERIMENTS[experiment]
    _CHUNK_STATE["unit_fn"] = unit_fn
    _CHUNK_STATE["table"] = table


def _make_mapper(workers):
    def map_chunks(cfg, n_units, unit_fn, table):
        if workers == 1:
            return [unit_fn(cfg, k, table) for k in range(n_units)]
        chunk = max(1, (n_units + 4 * workers - 1) // (4 * workers))
        spans = [(cfg, lo, min(lo + chunk, n_units)) for lo in range(0, n_units, chunk)]
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_chunk_state,
            initargs=(cfg["experiment"], table),
        ) as pool:
            parts = list(pool.map(_chunk_worker, spans))
        return [row for part in parts for row in part]

    return map_chunks


def replicate(cfg, n_workers):
    """Run the experiment with the given worker count; the merged result is
    independent of n_workers because unit streams are index-derived and the
    reduction order is fixed."""
    return run_experiment(cfg, _make_mapper(n_workers))


def _canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _sha256(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _write_rows(path, rows):
    if not rows:
        Path(path).write_text("")
        return
    keys = [k for k in rows[0] if not isinstance(rows[0][k], list)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(keys)
        for r in rows:
            writer.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in keys])


def _check_assertion(cfg, summary):
    key, op, bound = _ASSERTIONS[cfg["experiment"]]
    if op is None:
        return True, f"{key}={summary.get(key)}"
    val = summary[key]
    if op == "<=":
        ok = val <= bound
    elif op == ">=":
        ok = val >= bound
    elif op == "abs<=":
        ok = abs(val) <= bound
    else:
        center, tol = bound
        ok = abs(val - center) <= tol
    return ok, f"{key}={val} (bound {op} {bound})"


def _write_extra_csv(out_dir, cfg, summary):
    """Plot-friendly CSV companions: gap histograms and lambda grids."""
    extras = {}
    if cfg["experiment"] == "gaps":
        path = out_dir / "hist.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left", "bin_right", "mass"])
            edges, mass = summary["bin_edges"], summary["mass"]
            for a, b, m in zip(edges[:-1], edges[1:], mass):
                writer.writerow([repr(a), repr(b), repr(m)])
        extras["hist.csv"] = path
    if cfg["experiment"] == "clt":
        path = out_dir / "lambda.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["lambda", "z_abs_err", "z_stderr"])
            for lam, err, se in zip(summary["lambda_grid"], summary["z_abs_err"],
                                    summary["z_stderr"]):
                writer.writerow([repr(lam), repr(err), repr(se)])
        extras["lambda.csv"] = path
    return extras


def run(cfg, assert_mode=False):
    """Execute one experiment config and persist its artifacts.

    Returns the exit status (nonzero only when assert_mode is set and the
    threshold check fails).
    """
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.time()
    rows, summary = replicate(cfg, cfg["workers"])
    wall = time.time() - start
    summary_path = out_dir / "summary.json"
    rows_path = out_dir / "rows.csv"
    summary_path.write_text(_canonical_json(summary))
    _write_rows(rows_path, rows)
    extras = _write_extra_csv(out_dir, cfg, summary)
    ok, message = _check_assertion(cfg, summary)
    artifacts = {"summary.json": _sha256(summary_path), "rows.csv": _sha256(rows_path)}
    for name, path in extras.items():
        artifacts[name] = _sha256(path)
    manifest = {
        "config": {k: v for k, v in sorted(cfg.items())},
        "versions": {
            "dbmlab": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": wall,
        "artifacts": artifacts,
        "assertion": {"checked": assert_mode, "passed": ok, "detail": message},
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1))
    if assert_mode and not ok:
        return 1
    return 0


def verify(out_dir):
    """Recompute artifact checksums recorded in an existing manifest."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    status = 0
    for name, digest in manifest["artifacts"].items():
        actual = _sha256(out_dir / name)
        state = "ok" if actual == digest else "MISMATCH"
        if actual != digest:
            status = 1
        print(f"{name}: {state}")
    return status


def main(argv=None):
    parser = argparse.ArgumentParser(prog="dbmlab", description=__doc__)
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--n", type=int, default=None)
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--out", type=str, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--samples", type=int, default=None, dest="n_samples")
    parser.add_argument("--assert", dest="assert_mode", action="store_true")
    parser.add_argument("--verify", action="store_true",
                        help="recheck artifact checksums of an existing run")
    args = parser.parse_args(argv)
    file_cfg = {}
    if args.config:
        file_cfg = json.loads(Path(args.config).read_text())
    overrides = {
        "seed": args.seed,
        "n": args.n,
        "tau": args.tau,
        "out": args.out,
        "workers": args.workers,
        "n_samples": args.n_samples,
    }
    try:
        cfg = resolve_config(args.experiment, file_cfg, overrides)
    except ConfigurationError as exc:
        parser.error(str(exc))
    if args.verify:
        return verify(cfg["out"])
    return run(cfg, assert_mode=args.assert_mode)


if __name__ == "__main__":
    sys.exit(main())
