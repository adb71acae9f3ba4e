"""Experiment orchestration: config parsing, seeding, persistence, reports.

A run directory receives the resolved config echo, the kind-specific CSVs,
and a manifest; a crash mid-run leaves a FAILED marker instead of a silent
partial directory.  All cell-level randomness is derived from the master
seed through spawn keys, so enlarging one grid never shifts another cell's
stream.
"""

from __future__ import annotations

import concurrent.futures
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .io import (
    SchemaError,
    config_hash,
    load_json,
    load_spectrum,
    now_iso,
    parse_float,
    read_csv,
    save_spectrum,
    write_csv,
    write_json,
    write_text,
)
from .krr import TargetFunction, cosine_perturbation
from .lebesgue import spectral_report
from .offline import (
    ROW_COLUMNS,
    AmplificationConfig,
    amplification_experiment,
    competitors_from_target,
    measurement_grid,
)
from .online import (
    CENSUS_COLUMNS,
    BanditEnvironment,
    OnlineParams,
    reference_slope,
    region_count_bound,
    run_global_eps_ucb,
    run_pi_misspec_gpucb,
)
from .spectra import (
    adversarial_spectrum,
    matern_periodic_spectrum,
    mercer_kernel_1d,
    monotone_envelope,
    product_kernel,
)

KINDS = ("spectrum", "lebesgue-scan", "offline-amplification",
         "online-regret", "baseline-compare")

REPORT_COLUMNS = ("tau", "d_eff", "d_eff_tail", "sqrt_bound", "abel_bound",
                  "lebesgue_est", "lebesgue_tol")

COMPARE_COLUMNS = ("seed", "splitting_final", "global_final")

PASS, FAIL, INVALID = "PASS", "FAIL", "INVALID INPUT"


class ConfigError(ValueError):
    """Invalid experiment configuration; nothing is written to disk."""


def cell_seed(master: int, *key: int) -> int:
    ss = np.random.SeedSequence(master, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# Config parsing


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    kernel: dict
    tau_grid: tuple
    eps_grid: tuple
    n_grid: tuple
    seeds: int
    delta: float
    noise_scale: float
    master_seed: int
    horizon: int
    target: dict | None
    online: dict
    trunc_multi: int
    competitors: tuple | None
    raw: dict

    @classmethod
    def from_dict(cls, raw: dict, master_seed: int | None = None
                  ) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        kind = raw.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"unknown experiment kind: {kind!r}")
        kernel = raw.get("kernel")
        if not isinstance(kernel, dict):
            raise ConfigError("a kernel table is required")
        seeds = int(raw.get("seeds", 5))
        if seeds < 1:
            raise ConfigError("seeds must be at least 1")
        delta = float(raw.get("delta", 0.1))
        if not 0.0 < delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        noise = float(raw.get("noise_scale", 0.1))
        if noise < 0:
            raise ConfigError("noise_scale must be nonnegative")
        if master_seed is None:
            master_seed = int(raw.get("master_seed", 0))
        tau_grid = tuple(float(t) for t in raw.get("tau_grid", ()))
        eps_grid = tuple(float(e) for e in raw.get("eps_grid",
                                                   (0.0, 0.025, 0.05, 0.1,
                                                    0.2)))
        n_grid = tuple(int(n) for n in raw.get("n_grid", (100, 400, 1600)))
        horizon = int(raw.get("horizon", 1024))
        online = dict(raw.get("online", {}))
        target = raw.get("target")
        competitors = raw.get("competitors")
        if competitors is not None:
            competitors = tuple(tuple(float(v) for v in np.atleast_1d(p))
                                for p in competitors)

        if kind == "lebesgue-scan" and not tau_grid:
            raise ConfigError("lebesgue-scan needs a nonempty tau_grid")
        if kind == "offline-amplification":
            if not tau_grid:
                raise ConfigError("offline-amplification needs a tau_grid")
            if not n_grid:
                raise ConfigError("offline-amplification needs an n_grid")
            if target is None:
                raise ConfigError("offline-amplification needs a target")
        if kind in ("online-regret", "baseline-compare"):
            if target is None:
                raise ConfigError(f"{kind} needs a target")
            if horizon < 1:
                raise ConfigError("horizon must be at least 1")
            if online.get("split_exponent") is None \
                    and online.get("alpha") is None:
                raise ConfigError("online runs need split_exponent or alpha")

        resolved = dict(raw)
        resolved.update(
            kind=kind, seeds=seeds, delta=delta, noise_scale=noise,
            master_seed=master_seed, tau_grid=list(tau_grid),
            eps_grid=list(eps_grid), n_grid=list(n_grid), horizon=horizon,
        )
        return cls(kind=kind, kernel=kernel, tau_grid=tau_grid,
                   eps_grid=eps_grid, n_grid=n_grid, seeds=seeds,
                   delta=delta, noise_scale=noise, master_seed=master_seed,
                   horizon=horizon, target=target, online=online,
                   trunc_multi=int(raw.get("trunc_multi", 256)),
                   competitors=competitors, raw=resolved)


def build_kernel(spec: dict):
    family = spec.get("family")
    dim = int(spec.get("dim", 1))
    if dim < 1:
        raise ConfigError("kernel dim must be at least 1")
    if family == "matern":
        base = matern_periodic_spectrum(float(spec.get("nu", 1.5)),
                                        int(spec.get("truncation", 128)))
    elif family == "adversarial":
        base = adversarial_spectrum(float(spec.get("s", 2.0)),
                                    int(spec.get("seed", 0)),
                                    int(spec.get("count", 4096)))
    elif family == "spectrum-file":
        base = load_spectrum(spec["path"])
    else:
        raise ConfigError(f"unknown kernel family: {family!r}")
    if spec.get("envelope"):
        base = monotone_envelope(base)
    if dim == 1:
        return mercer_kernel_1d(base)
    return product_kernel(base, dim)


def build_target(kernel, spec: dict) -> TargetFunction:
    coeffs = {}
    for key, val in spec.get("coefficients", {}).items():
        parts = str(key).split(",")
        idx = int(parts[0]) if len(parts) == 1 else tuple(int(p)
                                                          for p in parts)
        coeffs[idx] = float(val)
    if not coeffs:
        raise ConfigError("target needs at least one coefficient")
    eps = float(spec.get("eps", 0.0))
    pert = None
    if "perturbation_frequency" in spec or eps > 0:
        pert = cosine_perturbation(int(spec.get("perturbation_frequency",
                                                301)))
    target = TargetFunction(kernel, coeffs, eps=eps, perturbation=pert)
    if "norm" in spec:
        target = target.with_norm(float(spec["norm"]))
    return target


def _online_pieces(cfg: ExperimentConfig):
    kernel = build_kernel(cfg.kernel)
    target = build_target(kernel, cfg.target)
    m = kernel.dim
    if cfg.competitors is not None:
        pts = np.array(cfg.competitors, dtype=float).reshape(-1, m)
    else:
        # benchmark point: argmax of the true objective on a fine grid
        grid = measurement_grid(m, 4097 if m == 1 else 16641)
        vals = target(grid)
        pts = grid[int(np.argmax(vals))].reshape(1, m)
    comp = competitors_from_target(target, pts)
    online = cfg.online
    norm = target.norm_bound * float(online.get("norm_factor", 1.0))
    params = OnlineParams(
        horizon=cfg.horizon,
        noise_scale=cfg.noise_scale,
        norm_bound=norm,
        eps=target.eps,
        delta=cfg.delta,
        lam=float(online.get("lam", 1.0)),
        split_exponent=online.get("split_exponent"),
        decay_alpha=online.get("alpha"),
        grid_points=int(online.get("grid_points", 9)),
    )
    return target, comp, params


def _online_cell(raw_cfg: dict, index: int, baseline: bool):
    cfg = ExperimentConfig.from_dict(raw_cfg)
    target, comp, params = _online_pieces(cfg)
    env = BanditEnvironment(target, comp, cfg.noise_scale,
                            cell_seed(cfg.master_seed, index))
    runner = run_global_eps_ucb if baseline else run_pi_misspec_gpucb
    log = runner(env, params)
    return index, log.to_csv(), log.census_csv(), log.final_regret


def _fan_out(raw_cfg: dict, indices, baseline_flags, jobs: int):
    tasks = list(zip(indices, baseline_flags))
    if jobs <= 1:
        return [_online_cell(raw_cfg, i, b) for i, b in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        futs = [pool.submit(_online_cell, raw_cfg, i, b) for i, b in tasks]
        results = [f.result() for f in futs]
    results.sort(key=lambda r: r[0])
    return results


# ---------------------------------------------------------------------------
# Experiment kinds


def _run_spectrum(cfg: ExperimentConfig, out: Path) -> dict:
    kernel = build_kernel(cfg.kernel)
    save_spectrum(out / "spectrum.csv", kernel.coordinate_spectra[0])
    return {"seed_list": []}


def _run_lebesgue(cfg: ExperimentConfig, out: Path) -> dict:
    kernel = build_kernel(cfg.kernel)
    rows = []
    for tau in cfg.tau_grid:
        rep = spectral_report(kernel, tau, trunc_multi=cfg.trunc_multi)
        rows.append((rep.tau, rep.d_eff, rep.d_eff_tail, rep.sqrt_bound,
                     rep.abel_bound, rep.lebesgue_est, rep.lebesgue_tol))
    write_csv(out / "lebesgue.csv", REPORT_COLUMNS, rows)
    return {"seed_list": []}


def _run_offline(cfg: ExperimentConfig, out: Path) -> dict:
    kernel = build_kernel(cfg.kernel)
    target = build_target(kernel, cfg.target)
    amp = AmplificationConfig(
        target=target,
        tau=cfg.tau_grid[0],
        noise_scale=cfg.noise_scale,
        eps_grid=cfg.eps_grid,
        n_grid=cfg.n_grid,
        reps=cfg.seeds,
        seed=cfg.master_seed,
    )
    result = amplification_experiment(amp)
    write_text(out / "amplification.csv", result.to_csv())
    summary_cols = ("eps", "n", "mean_uniform_err", "p90_uniform_err",
                    "mean_simple_regret", "p90_simple_regret")
    write_csv(out / "summary.csv", summary_cols,
              [tuple(s[c] for c in summary_cols) for s in result.summary])
    write_json(out / "results.json", {
        "slope": result.slope,
        "slope_stderr": result.slope_stderr,
        "intercept": result.intercept,
        "largest_n": result.largest_n,
    })
    return {"seed_list": [cfg.master_seed]}


def _run_online(cfg: ExperimentConfig, out: Path, jobs: int) -> dict:
    results = _fan_out(cfg.raw, range(cfg.seeds), [False] * cfg.seeds, jobs)
    for index, log_csv, census_csv, _ in results:
        write_text(out / f"regret_{index:03d}.csv", log_csv)
        write_text(out / f"census_{index:03d}.csv", census_csv)
    kernel = build_kernel(cfg.kernel)
    alpha = cfg.online.get("alpha")
    b = cfg.online.get("split_exponent", alpha)
    return {
        "seed_list": [cell_seed(cfg.master_seed, k)
                      for k in range(cfg.seeds)],
        "dim": kernel.dim,
        "alpha": alpha,
        "split_exponent": b,
        "reference_slope": (reference_slope(kernel.dim, float(alpha))
                            if alpha is not None else None),
        "horizon": cfg.horizon,
    }


def _run_compare(cfg: ExperimentConfig, out: Path, jobs: int) -> dict:
    split_runs = _fan_out(cfg.raw, range(cfg.seeds), [False] * cfg.seeds,
                          jobs)
    global_runs = _fan_out(cfg.raw, range(cfg.seeds), [True] * cfg.seeds,
                           jobs)
    rows = []
    for (i, _, _, r_split), (_, _, _, r_glob) in zip(split_runs,
                                                     global_runs):
        rows.append((cell_seed(cfg.master_seed, i), r_split, r_glob))
    write_csv(out / "compare.csv", COMPARE_COLUMNS, rows)
    kernel = build_kernel(cfg.kernel)
    return {
        "seed_list": [r[0] for r in rows],
        "dim": kernel.dim,
        "horizon": cfg.horizon,
        "split_exponent": cfg.online.get("split_exponent",
                                         cfg.online.get("alpha")),
    }


def run_experiment(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> int:
    """Write the run directory; 0 on success, 1 with a FAILED marker."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "config.json", cfg.raw)
    start = time.perf_counter()
    try:
        if cfg.kind == "spectrum":
            extra = _run_spectrum(cfg, out)
        elif cfg.kind == "lebesgue-scan":
            extra = _run_lebesgue(cfg, out)
        elif cfg.kind == "offline-amplification":
            extra = _run_offline(cfg, out)
        elif cfg.kind == "online-regret":
            extra = _run_online(cfg, out, jobs)
        else:
            extra = _run_compare(cfg, out, jobs)
    except Exception as exc:  # crash -> marker, nonzero status
        write_text(out / "FAILED", f"{type(exc).__name__}: {exc}\n")
        return 1
    manifest = {
        "kind": cfg.kind,
        "config_hash": config_hash(cfg.raw),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernopt": __version__,
        },
        "wall_time_s": time.perf_counter() - start,
        "created": now_iso(),
        "master_seed": cfg.master_seed,
    }
    manifest.update(extra)
    write_json(out / "manifest.json", manifest)
    return 0


# ---------------------------------------------------------------------------
# Reports


def _check(name: str, fn) -> dict:
    try:
        ok, detail = fn()
    except (SchemaError, OSError, KeyError) as exc:
        return {"name": name, "status": INVALID, "detail": str(exc)}
    return {"name": name, "status": PASS if ok else FAIL, "detail": detail}


def _sandwich_checks(out: Path) -> list[dict]:
    checks = []
    try:
        rows = read_csv(out / "lebesgue.csv", REPORT_COLUMNS)
    except (SchemaError, OSError) as exc:
        return [{"name": "sandwich", "status": INVALID, "detail": str(exc)}]
    for row in rows:
        def one(row=row):
            tau = parse_float(row, "tau")
            est = parse_float(row, "lebesgue_est")
            tol = parse_float(row, "lebesgue_tol")
            abel = parse_float(row, "abel_bound")
            sqrt_b = parse_float(row, "sqrt_bound")
            lower = est - tol
            ok = (lower <= abel + 1e-12
                  and lower <= math.sqrt(2.0) * sqrt_b + 1e-12)
            return ok, {
                "tau": tau,
                "abel_margin": abel - lower,
                "sqrt_margin": math.sqrt(2.0) * sqrt_b - lower,
            }
        checks.append(_check(f"sandwich tau={row['tau']}", one))
    return checks


def _spectrum_checks(out: Path) -> list[dict]:
    def one():
        spec = load_spectrum(out / "spectrum.csv")
        return bool(np.all(spec.values >= 0)), {"count": len(spec)}

    return [_check("spectrum-schema", one)]


def _offline_checks(out: Path) -> list[dict]:
    def one():
        rows = read_csv(out / "amplification.csv", ROW_COLUMNS)
        if not rows:
            raise SchemaError("amplification.csv has no rows")
        results = load_json(out / "results.json")
        slope = float(results["slope"])
        stderr = float(results["slope_stderr"])
        d_eff = parse_float(rows[0], "d_eff")
        ceiling = math.sqrt(2.0) * math.sqrt(d_eff) + 1.0 + 3.0 * stderr
        return slope <= ceiling, {"slope": slope, "ceiling": ceiling}

    return [_check("slope-ceiling", one)]


def _online_checks(out: Path, manifest: dict) -> list[dict]:
    checks = []
    horizon = int(manifest["horizon"])
    dim = int(manifest["dim"])
    b = float(manifest["split_exponent"])
    bound = region_count_bound(horizon, dim, b)
    for k, _ in enumerate(manifest["seed_list"]):
        def one(k=k):
            rows = read_csv(out / f"census_{k:03d}.csv", CENSUS_COLUMNS)
            return len(rows) <= bound, {"regions": len(rows),
                                        "bound": bound}
        checks.append(_check(f"census run {k}", one))
    return checks


def _compare_checks(out: Path) -> list[dict]:
    def one():
        rows = read_csv(out / "compare.csv", COMPARE_COLUMNS)
        if not rows:
            raise SchemaError("compare.csv has no rows")
        split_mean = float(np.mean([parse_float(r, "splitting_final")
                                    for r in rows]))
        glob_mean = float(np.mean([parse_float(r, "global_final")
                                   for r in rows]))
        return split_mean <= glob_mean, {"splitting_mean": split_mean,
                                         "global_mean": glob_mean}

    return [_check("baseline-dominance", one)]


def report(run_dir) -> tuple[str, dict]:
    """Assemble the bound-vs-measurement summary for a finished run."""
    out = Path(run_dir)
    manifest_path = out / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no manifest in {out}")
    manifest = load_json(manifest_path)
    kind = manifest["kind"]
    if kind == "spectrum":
        checks = _spectrum_checks(out)
    elif kind == "lebesgue-scan":
        checks = _sandwich_checks(out)
    elif kind == "offline-amplification":
        checks = _offline_checks(out)
    elif kind == "online-regret":
        checks = _online_checks(out, manifest)
    else:
        checks = _compare_checks(out)
    payload = {"kind": kind, "config_hash": manifest["config_hash"],
               "checks": checks}
    write_json(out / "report.json", payload)
    lines = [f"{c['status']:13s} {c['name']}" for c in checks]
    return "\n".join(lines), payload
