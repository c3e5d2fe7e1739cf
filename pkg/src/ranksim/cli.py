"""Command line driver wiring JSON configs to simulations and reports.

Each subcommand maps to one experiment kind. A run writes its artifacts
plus a deterministic summary.json carrying {"kind", "params", "results",
"manifest", "seed"}, where the manifest lists every artifact with its
sha256. Timestamps live in run_meta.json, which stays out of the manifest
so reruns with identical config and seed are byte-identical.

Exit codes: 0 success, 1 unusable config or flags, 2 parameter or regime
rejection, 3 statistical acceptance failure (compare and unstable kinds).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .ctmc import (
    diffusion_scale,
    empirical_stationary,
    idle_time,
    replication_seed,
    simulate,
    thread_count,
    tie_time,
    write_gap_csv,
)
from .diffusion import DiffusionConfig, simulate_reflected, unstable_escape_slope
from .model import (
    SchemeSpec,
    SystemParams,
    drift_vector,
    routing_probabilities,
    validate_params,
)
from .stationary import metrics, stability_check, stationary_law, unstable_gap_law
from .stats import (
    CTMC_THRESHOLDS,
    FitThresholds,
    SampleSet,
    fit_product_exp,
    write_samples_csv,
)

__all__ = ["ExperimentConfig", "ConfigError", "main", "run"]

_COMMANDS = (
    ("validate", "validate", "check parameter admissibility"),
    ("simulate-ctmc", "ctmc", "one finite-n event-driven run"),
    ("simulate-diffusion", "diffusion", "one reflected-diffusion run"),
    ("stationary", "stationary", "closed-form stationary law"),
    ("metrics", "metrics", "closed-form workload/imbalance metrics"),
    ("compare", "compare", "finite-n stationary samples vs the product law"),
    ("unstable", "unstable", "overloaded-regime gap law and escape slope"),
)
_KINDS = tuple(kind for _, kind, _ in _COMMANDS)

_ALLOWED_KEYS = {
    "kind", "params", "n_list", "horizon", "burn_in", "dt", "sample_dt",
    "replications", "seed", "out", "thresholds", "rho", "Z0", "noise_scale",
    "q0", "thinning",
}


class ConfigError(Exception):
    """The config document or flags cannot be used (exit code 1)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment request, resolved from config file and flags."""

    kind: str
    params: dict | None = None       # {"K","a_tilde","n"} or {"scheme":{...},"n":...}
    n_list: tuple[int, ...] | None = None
    horizon: float | None = None
    burn_in: float | None = None     # None means 10% of the horizon
    dt: float | None = None
    sample_dt: float | None = None
    replications: int | None = None
    seed: int = 0
    out: Path = Path(".")
    thresholds: FitThresholds = CTMC_THRESHOLDS
    rho: tuple[float, ...] | None = None
    Z0: tuple[float, ...] | None = None
    noise_scale: float = 1.0
    q0: tuple[int, ...] | None = None
    thinning: float = 1.0
    quiet: bool = False

    @classmethod
    def from_document(cls, doc, kind: str, out_flag=None, seed_flag=None,
                      quiet: bool = False) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError(f"config must be a JSON object, got {type(doc).__name__}")
        unknown = set(doc) - _ALLOWED_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        doc_kind = doc.get("kind")
        if doc_kind is not None and doc_kind != kind:
            raise ConfigError(
                f"config kind {doc_kind!r} does not match the {kind!r} subcommand"
            )
        seed = seed_flag if seed_flag is not None else doc.get("seed", 0)
        if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise ConfigError(f"seed must be an integer in [0, 2^64), got {seed!r}")
        out = Path(out_flag) if out_flag is not None else Path(doc.get("out", "."))
        try:
            return cls(
                kind=kind,
                params=_as_dict(doc.get("params"), "params"),
                n_list=_as_int_tuple(doc.get("n_list"), "n_list"),
                horizon=_as_float(doc.get("horizon"), "horizon"),
                burn_in=_as_float(doc.get("burn_in"), "burn_in"),
                dt=_as_float(doc.get("dt"), "dt"),
                sample_dt=_as_float(doc.get("sample_dt"), "sample_dt"),
                replications=_as_int(doc.get("replications"), "replications"),
                seed=seed,
                out=out,
                thresholds=_as_thresholds(doc.get("thresholds")),
                rho=_as_float_tuple(doc.get("rho"), "rho"),
                Z0=_as_float_tuple(doc.get("Z0"), "Z0"),
                noise_scale=_as_float(doc.get("noise_scale"), "noise_scale", 1.0),
                q0=_as_int_tuple(doc.get("q0"), "q0"),
                thinning=_as_float(doc.get("thinning"), "thinning", 1.0),
                quiet=quiet,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e


def _as_dict(v, name):
    if v is None:
        return None
    if not isinstance(v, dict):
        raise ConfigError(f"{name} must be an object, got {type(v).__name__}")
    return v


def _as_float(v, name, default=None):
    if v is None:
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name} must be a number, got {v!r}")
    return float(v)


def _as_int(v, name, default=None):
    if v is None:
        return default
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    return v


def _as_float_tuple(v, name):
    if v is None:
        return None
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{name} must be an array, got {v!r}")
    return tuple(_as_float(x, f"{name} entry") for x in v)


def _as_int_tuple(v, name):
    if v is None:
        return None
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"{name} must be an array, got {v!r}")
    return tuple(_as_int(x, f"{name} entry") for x in v)


def _as_thresholds(v) -> FitThresholds:
    if v is None:
        return CTMC_THRESHOLDS
    if not isinstance(v, dict) or set(v) - {"ks", "mean_rel"}:
        raise ConfigError('thresholds must be {"ks": ..., "mean_rel": ...}')
    return FitThresholds(
        ks=_as_float(v.get("ks"), "thresholds.ks", CTMC_THRESHOLDS.ks),
        mean_rel=_as_float(v.get("mean_rel"), "thresholds.mean_rel",
                           CTMC_THRESHOLDS.mean_rel),
    )


# --- parameter resolution -------------------------------------------------

def _require(value, name, kind):
    if value is None:
        raise ConfigError(f"kind {kind!r} needs {name!r} in the config")
    return value


def _scheme_of(params_doc) -> SchemeSpec | None:
    sch = params_doc.get("scheme")
    if sch is None:
        return None
    if not isinstance(sch, dict):
        raise ConfigError("params.scheme must be an object")
    missing = {"a", "b", "d", "K"} - set(sch)
    if missing:
        raise ConfigError(f"params.scheme missing keys {sorted(missing)}")
    try:
        return SchemeSpec.d_scheme(a=sch["a"], b=sch["b"], d=sch["d"], K=sch["K"])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad scheme: {e}") from e


def _a_tilde_of(params_doc) -> tuple[float, ...]:
    scheme = _scheme_of(params_doc)
    if scheme is not None:
        return scheme.expand()
    if "a_tilde" not in params_doc:
        raise ConfigError('params needs either "scheme" or "a_tilde"')
    return _as_float_tuple(params_doc["a_tilde"], "params.a_tilde")


def _system_params_of(params_doc) -> SystemParams:
    a_tilde = _a_tilde_of(params_doc)
    if "n" not in params_doc:
        raise ConfigError('params needs "n" for finite-n kinds')
    n = _as_int(params_doc["n"], "params.n")
    K = _as_int(params_doc.get("K"), "params.K", len(a_tilde))
    return SystemParams(K=K, a_tilde=a_tilde, n=n)


def _params_echo(p: SystemParams) -> dict:
    return {"K": p.K, "a_tilde": [float(v) for v in p.a_tilde], "n": p.n}


# --- artifact writers ------------------------------------------------------

def _write_columns_csv(dest: Path, labels, t, X) -> None:
    with dest.open("w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + list(labels))
        for tk, row in zip(t, X):
            w.writerow([repr(float(tk))] + [repr(float(v)) for v in row])


def _write_diagnostics_csv(dest: Path, rows) -> None:
    """rows are (metric, index, value) with pair indexes rendered as "i-j"."""
    with dest.open("w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "index", "value"])
        for metric, index, value in rows:
            w.writerow([metric, index, repr(float(value))])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# --- runners ---------------------------------------------------------------

@dataclass
class RunOutput:
    params: dict
    results: dict
    artifacts: list
    status: int = 0


def _run_validate(cfg: ExperimentConfig) -> RunOutput:
    p = _system_params_of(_require(cfg.params, "params", cfg.kind))
    res = validate_params(p)
    results = {
        "valid": res.ok,
        "violations": list(res.violations),
        "n_star": p.n_star,
        "upsilon": p.upsilon,
    }
    if res.ok:
        results["routing_probabilities"] = [float(v) for v in routing_probabilities(p)]
    return RunOutput(params=_params_echo(p), results=results, artifacts=[],
                     status=0 if res.ok else 2)


def _run_ctmc(cfg: ExperimentConfig) -> RunOutput:
    p = _system_params_of(_require(cfg.params, "params", cfg.kind))
    T = _require(cfg.horizon, "horizon", cfg.kind)
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else 1.0
    tr = simulate(p, T=T, seed=cfg.seed, q0=cfg.q0, sample_dt=sample_dt)
    z = diffusion_scale(tr)
    burn = cfg.burn_in if cfg.burn_in is not None else 0.1 * T

    gaps_file = cfg.out / "gaps.csv"
    write_gap_csv(z, gaps_file)
    rows = [("idle_time", str(i + 1), idle_time(tr, i)) for i in range(p.K)]
    rows += [
        ("tie_time", f"{i + 1}-{j + 1}", tie_time(tr, i, j))
        for i in range(p.K) for j in range(i + 1, p.K)
    ]
    diag_file = cfg.out / "diagnostics.csv"
    _write_diagnostics_csv(diag_file, rows)

    results = {
        "arrivals": tr.arrivals,
        "departures": tr.departures,
        "final_queues": [int(v) for v in tr.states[-1]],
        "mean_gaps": [float(v) for v in z.Z[z.t > burn].mean(axis=0)],
        "idle_time": [idle_time(tr, i) for i in range(p.K)],
        "tie_time": {f"{i + 1}-{j + 1}": tie_time(tr, i, j)
                     for i in range(p.K) for j in range(i + 1, p.K)},
    }
    echo = _params_echo(p)
    echo.update(horizon=T, burn_in=burn, sample_dt=sample_dt)
    if cfg.q0 is not None:
        echo["q0"] = list(cfg.q0)
    return RunOutput(params=echo, results=results,
                     artifacts=[gaps_file, diag_file])


def _diffusion_config(cfg: ExperimentConfig) -> DiffusionConfig:
    if cfg.rho is not None:
        rho = cfg.rho
    else:
        params_doc = _require(cfg.params, 'params (or top-level "rho")', cfg.kind)
        rho = tuple(float(v) for v in drift_vector(_a_tilde_of(params_doc)))
    T = _require(cfg.horizon, "horizon", cfg.kind)
    dt = cfg.dt if cfg.dt is not None else 1e-3
    try:
        return DiffusionConfig(K=len(rho), rho=rho, dt=dt, T=T, seed=cfg.seed,
                               Z0=cfg.Z0, noise_scale=cfg.noise_scale)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _run_diffusion(cfg: ExperimentConfig) -> RunOutput:
    c = _diffusion_config(cfg)
    z, l = simulate_reflected(c)
    burn = cfg.burn_in if cfg.burn_in is not None else 0.1 * c.T
    stride = max(1, round(cfg.sample_dt / c.dt)) if cfg.sample_dt is not None else 1

    gaps_file = cfg.out / "gaps.csv"
    write_gap_csv(type(z)(t=z.t[::stride], Z=z.Z[::stride], n=None), gaps_file)
    lt_file = cfg.out / "local_time.csv"
    _write_columns_csv(lt_file, [f"l{i + 1}" for i in range(c.K)],
                       l.t[::stride], l.L[::stride])

    sel = z.t > burn
    results = {
        "time_avg": [float(v) for v in z.Z[sel].mean(axis=0)],
        "final": [float(v) for v in z.Z[-1]],
        "local_time_final": [float(v) for v in l.L[-1]],
    }
    echo = {"K": c.K, "rho": list(c.rho), "dt": c.dt, "T": c.T,
            "Z0": [float(v) for v in c.z0_array()], "noise_scale": c.noise_scale,
            "burn_in": burn, "sample_dt": cfg.sample_dt}
    return RunOutput(params=echo, results=results,
                     artifacts=[gaps_file, lt_file])


def _run_stationary(cfg: ExperimentConfig) -> RunOutput:
    params_doc = _require(cfg.params, "params", cfg.kind)
    a_tilde = _a_tilde_of(params_doc)
    rep = stability_check(a_tilde)
    law = stationary_law(a_tilde)  # raises ValueError when unstable -> exit 2
    results = {
        "stable": True,
        "margins": [float(v) for v in rep.margins],
        "eta": [-float(r) for r in law.rates],
        "rates": list(law.rates),
        "means": [float(v) for v in law.means()],
    }
    return RunOutput(params={"a_tilde": [float(v) for v in a_tilde]},
                     results=results, artifacts=[])


def _run_metrics(cfg: ExperimentConfig) -> RunOutput:
    params_doc = _require(cfg.params, "params", cfg.kind)
    scheme = _scheme_of(params_doc)
    if scheme is None:
        raise ConfigError('kind "metrics" needs the scheme form of params')
    rep = metrics(scheme)  # ValueError on the critical boundary -> exit 2
    echo = {"scheme": {"a": scheme.a, "b": scheme.b, "d": scheme.d, "K": scheme.K},
            "upsilon": rep.upsilon}
    return RunOutput(params=echo, results=rep.to_json_dict(), artifacts=[])


def _fit_dicts(fits) -> list[dict]:
    return [f.to_json_dict() for f in fits]


def _run_compare(cfg: ExperimentConfig) -> RunOutput:
    params_doc = _require(cfg.params, "params", cfg.kind)
    a_tilde = _a_tilde_of(params_doc)
    law = stationary_law(a_tilde)  # unstable parameters -> exit 2
    T = _require(cfg.horizon, "horizon", cfg.kind)
    reps = _require(cfg.replications, "replications", cfg.kind)
    burn = cfg.burn_in if cfg.burn_in is not None else 0.1 * T
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else 1.0
    if cfg.n_list is not None:
        n_values = list(cfg.n_list)
        if not n_values:
            raise ConfigError("n_list must be nonempty")
    else:
        n_values = [_system_params_of(params_doc).n]

    artifacts = []
    runs = []
    for idx, n in enumerate(n_values):
        p = SystemParams(K=len(a_tilde), a_tilde=a_tilde, n=n)
        emp = empirical_stationary(
            p, T=T, burn_in=burn, replications=reps,
            seed=cfg.seed + idx, sample_dt=sample_dt, thinning=cfg.thinning,
        )
        fits = fit_product_exp(emp.sample_sets, law, cfg.thresholds)
        tag = f"_n{n}" if len(n_values) > 1 else ""
        for s in emp.sample_sets:
            f = cfg.out / f"samples{tag}_{s.label}.csv"
            write_samples_csv(s, f)
            artifacts.append(f)
        runs.append({
            "n": n,
            "empirical": emp.to_json_dict(),
            "fits": _fit_dicts(fits),
            "passed": all(f.passed for f in fits),
        })
    passed = all(r["passed"] for r in runs)
    results = {"law": {"rates": list(law.rates)}, "runs": runs, "passed": passed}
    echo = {"K": len(a_tilde), "a_tilde": [float(v) for v in a_tilde],
            "n_list": n_values, "horizon": T, "burn_in": burn,
            "sample_dt": sample_dt, "replications": reps,
            "thinning": cfg.thinning,
            "thresholds": {"ks": cfg.thresholds.ks,
                           "mean_rel": cfg.thresholds.mean_rel}}
    return RunOutput(params=echo, results=results, artifacts=artifacts,
                     status=0 if passed else 3)


def _run_unstable(cfg: ExperimentConfig) -> RunOutput:
    p = _system_params_of(_require(cfg.params, "params", cfg.kind))
    law = unstable_gap_law(p.a_tilde)  # stable or boundary parameters -> exit 2
    T = _require(cfg.horizon, "horizon", cfg.kind)
    if T < 100.0:
        raise ValueError(f"horizon {T} too short for an escape-slope fit (need >= 100)")
    reps = _require(cfg.replications, "replications", cfg.kind)
    sample_dt = cfg.sample_dt if cfg.sample_dt is not None else 1.0

    def one(r: int):
        tr = simulate(p, T=T, seed=replication_seed(cfg.seed, r),
                      sample_dt=sample_dt)
        return diffusion_scale(tr)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        paths = list(pool.map(one, range(reps)))

    # trailing half of each path: gap samples pooled, slope fit per path
    pooled = np.concatenate(
        [z.Z[z.t >= z.t[-1] - 0.5 * (z.t[-1] - z.t[0]), 1:] for z in paths], axis=0
    )
    sets = [SampleSet(values=pooled[:, i], label=f"z{i + 2}", thinning=cfg.thinning)
            for i in range(p.K - 1)]
    fits = fit_product_exp(sets, law, cfg.thresholds)
    slopes = [unstable_escape_slope(z)[0] for z in paths]
    slope_mean = float(np.mean(slopes))
    slope_se = float(np.std(slopes, ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    expected = -p.upsilon / p.K  # b/K - a for the skew (a-b, a, ..., a)
    slope_rel = abs(slope_mean / expected - 1.0)
    slope_pass = bool(slope_rel < cfg.thresholds.mean_rel)

    artifacts = []
    for s in sets:
        f = cfg.out / f"samples_{s.label}.csv"
        write_samples_csv(s, f)
        artifacts.append(f)
    diag_file = cfg.out / "diagnostics.csv"
    _write_diagnostics_csv(
        diag_file, [("slope", str(r), v) for r, v in enumerate(slopes)]
    )
    artifacts.append(diag_file)

    passed = bool(all(f.passed for f in fits) and slope_pass)
    results = {
        "law": {"rates": list(law.rates)},
        "fits": _fit_dicts(fits),
        "slope": {"estimate": slope_mean, "se": slope_se, "expected": expected,
                  "rel_error": slope_rel, "passed": slope_pass},
        "D_unst": float(np.sum(law.means())),
        "passed": passed,
    }
    echo = _params_echo(p)
    echo.update(horizon=T, sample_dt=sample_dt, replications=reps,
                thinning=cfg.thinning,
                thresholds={"ks": cfg.thresholds.ks,
                            "mean_rel": cfg.thresholds.mean_rel})
    return RunOutput(params=echo, results=results, artifacts=artifacts,
                     status=0 if passed else 3)


_RUNNERS = {
    "validate": _run_validate,
    "ctmc": _run_ctmc,
    "diffusion": _run_diffusion,
    "stationary": _run_stationary,
    "metrics": _run_metrics,
    "compare": _run_compare,
    "unstable": _run_unstable,
}


# --- entry point -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default sys.exit(2) collides with ours
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ranksim",
                     description="rank-routed parallel queues: simulation "
                                 "and closed-form analysis")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command, kind, help_text in _COMMANDS:
        sp = sub.add_parser(command, help=help_text)
        sp.set_defaults(kind=kind)
        sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed (u64)")
        sp.add_argument("--quiet", action="store_true",
                        help="suppress progress output")
    return parser


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e


def _describe(kind: str, results: dict) -> list[str]:
    if "error" in results:
        return []
    if kind == "validate":
        if results["valid"]:
            return ["parameters valid"]
        return ["invalid: " + "; ".join(results["violations"])]
    if kind == "metrics":
        return [f"{k} = {v}" for k, v in results.items()]
    if kind == "stationary":
        return [f"stable; rates = {results['rates']}"]
    if kind == "ctmc":
        return [f"arrivals = {results['arrivals']}, "
                f"departures = {results['departures']}",
                f"mean gaps = {results['mean_gaps']}"]
    if kind == "diffusion":
        return [f"time averages = {results['time_avg']}"]
    lines = []
    if kind == "compare":
        for run_res in results["runs"]:
            for f in run_res["fits"]:
                lines.append(
                    f"n={run_res['n']} {f['label']}: ks={f['ks']:.4f} "
                    f"mean_rel={f['mean_rel_error']:.4f} "
                    f"{'pass' if f['passed'] else 'FAIL'}"
                )
    if kind == "unstable":
        for f in results["fits"]:
            lines.append(f"{f['label']}: ks={f['ks']:.4f} "
                         f"mean_rel={f['mean_rel_error']:.4f} "
                         f"{'pass' if f['passed'] else 'FAIL'}")
        s = results["slope"]
        lines.append(f"slope = {s['estimate']:.4f} (expected {s['expected']}) "
                     f"{'pass' if s['passed'] else 'FAIL'}")
    lines.append("passed" if results["passed"] else "FAILED")
    return lines


def _finish(cfg: ExperimentConfig, params: dict, results: dict, artifacts,
            started: str, argv) -> None:
    manifest = dict(sorted((p.name, _sha256(p)) for p in artifacts))
    summary = {"kind": cfg.kind, "params": params, "results": results,
               "manifest": manifest, "seed": cfg.seed}
    with (cfg.out / "summary.json").open("w", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    meta = {"command": cfg.kind, "argv": list(argv) if argv is not None else None,
            "started": started, "finished": _utc_now(),
            "threads": thread_count()}
    with (cfg.out / "run_meta.json").open("w", newline="\n") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run(cfg: ExperimentConfig, argv=None) -> int:
    """Execute one experiment; returns the process exit code."""
    started = _utc_now()
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"error: cannot create output directory {cfg.out}: {e}",
              file=sys.stderr)
        return 1
    try:
        out = _RUNNERS[cfg.kind](cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        _finish(cfg, cfg.params or {}, {"error": str(e)}, [], started, argv)
        print(f"error: {e}", file=sys.stderr)
        return 2
    _finish(cfg, out.params, out.results, out.artifacts, started, argv)
    if not cfg.quiet:
        for line in _describe(cfg.kind, out.results):
            print(line)
        print(f"summary: {cfg.out / 'summary.json'}")
    if out.status == 2:
        print("; ".join(out.results.get("violations", [])) or "validation failed",
              file=sys.stderr)
    return out.status


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        doc = _read_config(args.config)
        cfg = ExperimentConfig.from_document(
            doc, kind=args.kind, out_flag=args.out, seed_flag=args.seed,
            quiet=args.quiet,
        )
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return run(cfg, argv=argv if argv is not None else sys.argv[1:])
