"""Configuration-driven experiment runner.

Two commands: ``run <config.json>`` executes one experiment and writes a
CSV report (one row per result line, frozen column set per experiment)
plus a JSON report (full nested payload), and ``list`` prints the
experiment catalog.  Exit codes: 0 all verdicts PASS / converged, 1
numerical failure (partial report written), 2 config error, 3 exponent
hypothesis rejection.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import estimates as est
from . import solver as sol
from .grid import Grid, GridError, RangeError, SpectralField, airy_propagate
from .norms import (
    FLParams,
    XsbParams,
    fl_norm,
    lifespan_exponent,
    sr_threshold,
)

EXPERIMENTS = (
    "exponents",
    "lifespan",
    "norm-suite",
    "probe",
    "resonant-integral",
    "solve",
)


class ConfigError(ValueError):
    """Malformed or unknown-key configuration."""


_TOP_KEYS = {"experiment", "seed", "out", "params"}

_PARAM_KEYS = {
    "probe": {"estimate_id", "r", "count", "grid_ns"},
    "norm-suite": {"grid_n", "length", "n_t", "t_window"},
    "exponents": {"r_values"},
    "resonant-integral": {"xis", "epsilon", "n"},
    "solve": {
        "n_x",
        "length",
        "delta",
        "r",
        "s",
        "b",
        "sign",
        "amplitude",
        "width",
        "max_iter",
        "tol",
    },
    "lifespan": {
        "r",
        "s",
        "lambdas",
        "amplitude_power",
        "n_x",
        "length",
        "n_t",
        "rel_tol",
    },
}

_COLUMNS = {
    "probe": ["estimate_id", "r", "s", "b", "grid_n", "max_ratio", "growth", "verdict"],
    "norm-suite": ["quantity", "r", "s", "b", "value", "verdict"],
    "exponents": [
        "r",
        "s0",
        "s1",
        "theta",
        "q0",
        "q1",
        "p",
        "p0",
        "p1",
        "sr_threshold",
        "lifespan_exponent",
        "verdict",
    ],
    "resonant-integral": ["xi", "epsilon", "sup_value", "tau_star", "slope", "verdict"],
    "solve": [
        "n_x",
        "delta",
        "r",
        "s",
        "b",
        "sign",
        "n_iter",
        "residual",
        "mass_drift",
        "l2_drift",
        "verdict",
    ],
    "lifespan": ["lam", "norm", "delta_star", "slope", "verdict"],
}

# catalog anchors: which statement of the estimate catalog each id probes
_ESTIMATE_ANCHORS = {
    "lemma1": "Lemma 1: bilinear Airy smoothing in mixed dual-Lebesgue norms",
    "cor_b1": "Corollary B1: bilinear smoothing transferred to dispersive-weight norms",
    "cor_b2_204": "Corollary B2 (dual form): adjoint bilinear bound with negative weight",
    "fs20": "Estimate FS: maximal-in-band space-time bound for the free flow",
    "lemma2": "Lemma 2: trilinear bound on the frequency-separated region",
    "cor_t1c": "Corollary T1C: frequency-separated trilinear bound, weighted inputs",
    "lemma3": "Lemma 3: sign-separated trilinear bound via fractional integration",
    "cor_t2c": "Corollary T2C: sign-separated bound with interpolated regularities",
    "lemma4": "Lemma 4: same-sign trilinear bound via dyadic level sets",
    "cor_t3c": "Corollary T3C: same-sign bound with regularity-shifted inputs",
    "theorem2": "Theorem 2: full trilinear estimate behind the contraction argument",
}

_EXPERIMENT_ANCHORS = {
    "exponents": "exponent bookkeeping: thresholds, interpolation bundles, lifespan formula",
    "lifespan": "Remark (lifespan): fitted decay of the largest contracting step",
    "norm-suite": "norm layer self-checks: duality, closed forms, flow invariance",
    "probe": "ratio-growth probe of one estimate id across grid refinements",
    "resonant-integral": "resonant denominator integral: sup-in-tau decay in the frequency",
    "solve": "Theorem 1: Picard iteration on the Duhamel formulation",
}


def _fmt(x) -> str:
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def load_config(path: str | Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {list(EXPERIMENTS)}, got {exp!r}")
    params = cfg.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object")
    bad = set(params) - _PARAM_KEYS[exp]
    if bad:
        raise ConfigError(f"unknown {exp} params: {sorted(bad)}")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")


def emit_config(cfg: dict) -> str:
    """Canonical JSON echo; parse -> emit -> parse is lossless."""
    return json.dumps(cfg, sort_keys=True, indent=2)


def _grid_fingerprint(g: Grid) -> str:
    return "n_x=%d,length=%.12g,n_t=%d,t_window=%.12g" % (
        g.n_x,
        g.length,
        g.n_t,
        g.t_window,
    )


# -- experiment bodies ----------------------------------------------------------


def _run_probe(params: dict, seed: int):
    eid = params.get("estimate_id", "lemma1")
    spec = est.default_spec(eid, r=params.get("r"))
    plan = est.default_plan(
        eid,
        seed=seed,
        count=int(params.get("count", 50)),
        grid_ns=tuple(params.get("grid_ns", (64, 128, 256))),
        spec=spec,
    )
    report = est.probe(plan, seed=seed)
    rows = report.to_rows(spec, seed)
    payload = {
        "estimate_id": eid,
        "max_ratios": report.max_ratios,
        "growths": report.growths,
        "total_growth": report.total_growth,
        "verdict": report.verdict,
        "dropped": report.dropped,
        "grid_fingerprints": [_grid_fingerprint(g) for g in plan.grids],
        "samples": report.samples,
    }
    ok = report.verdict == "PASS"
    return rows, payload, ok


def _run_norm_suite(params: dict, seed: int):
    n = int(params.get("grid_n", 128))
    grid = Grid(
        n,
        float(params.get("length", np.pi * n / 8.0)),
        n_t=int(params.get("n_t", 64)),
        t_window=float(params.get("t_window", 1.25)),
        require_tau_cover=False,
    )
    gauss = SpectralField(
        grid,
        np.exp(-((grid.x - grid.length / 2.0) ** 2) / 2.0).astype(complex),
        "physical",
    )
    rows = []
    checks = []

    def add(quantity, r, s, b, value, ok):
        rows.append(
            {
                "quantity": quantity,
                "r": r,
                "s": s,
                "b": b,
                "value": value,
                "verdict": "PASS" if ok else "FAIL",
            }
        )
        checks.append(ok)

    l2 = fl_norm(gauss, FLParams(2.0))
    add("gaussian_l2", 2.0, 0.0, "", l2, abs(l2 - np.pi**0.25) < 1e-6)
    for r, s in ((1.5, 0.2), (2.0, 0.25), (3.0, 0.0)):
        base = fl_norm(gauss, FLParams(r, s))
        moved = fl_norm(airy_propagate(gauss, 0.7), FLParams(r, s))
        add("airy_invariance_defect", r, s, "", abs(moved - base), abs(moved - base) < 1e-10)
    thr = sr_threshold(2.0)
    add("sr_threshold", 2.0, thr, "", thr, abs(thr - 0.25) < 1e-15)
    payload = {"grid_fingerprint": _grid_fingerprint(grid), "rows": rows}
    return rows, payload, all(checks)


def _run_exponents(params: dict, seed: int):
    rows = []
    ok_all = True
    for r in params.get("r_values", [1.2, 1.5, 2.0]):
        r = float(r)
        bundle = est.t2c_exponents(r)
        ok = abs(bundle.s0 + 2.0 * bundle.s1 - 1.0 / r) < 1e-12
        ok_all = ok_all and ok
        rows.append(
            {
                "r": r,
                "s0": bundle.s0,
                "s1": bundle.s1,
                "theta": bundle.theta,
                "q0": bundle.q0,
                "q1": bundle.q1,
                "p": bundle.p,
                "p0": bundle.p0,
                "p1": bundle.p1,
                "sr_threshold": sr_threshold(min(r, 2.0)),
                "lifespan_exponent": lifespan_exponent(min(r, 2.0)),
                "verdict": "PASS" if ok else "FAIL",
            }
        )
    return rows, {"rows": rows}, ok_all


def _run_resonant(params: dict, seed: int):
    eps = float(params.get("epsilon", 0.1))
    xis = [float(x) for x in params.get("xis", [8.0, 16.0, 32.0, 64.0])]
    n = int(params.get("n", 768))
    slope, pts = est.resonant_slope(eps, tuple(xis), n=n)
    rows = []
    for xi, v in pts:
        _, tau_star = est.resonant_sup_tau(xi, eps, n=n)
        rows.append(
            {
                "xi": xi,
                "epsilon": eps,
                "sup_value": v,
                "tau_star": tau_star,
                "slope": slope,
                "verdict": "PASS" if slope < 0.0 else "FAIL",
            }
        )
    return rows, {"slope": slope, "points": pts}, slope < 0.0


def _run_solve(params: dict, seed: int):
    n_x = int(params.get("n_x", 128))
    length = float(params.get("length", 16.0 * np.pi))
    delta = float(params.get("delta", 0.05))
    r = float(params.get("r", 2.0))
    s = float(params.get("s", sr_threshold(min(r, 2.0))))
    b = float(params.get("b", 1.0 / r + 0.1))
    sign = float(params.get("sign", 1.0))
    grid = sol.solver_grid(n_x, length, delta)
    amp = float(params.get("amplitude", 0.1))
    width = float(params.get("width", 1.0))
    data = SpectralField(
        grid, (amp * np.exp(-((grid.xi * width) ** 2) / 2.0)).astype(complex), "frequency"
    )
    cfg = sol.SolverConfig(
        XsbParams(r, s, b),
        delta,
        int(params.get("max_iter", 30)),
        float(params.get("tol", 1e-10)),
        sign,
    )
    state = sol.picard_solve(data, cfg, grid)
    cons = sol.conservation_check(state)
    row = {
        "n_x": n_x,
        "delta": delta,
        "r": r,
        "s": s,
        "b": b,
        "sign": sign,
        "n_iter": state.n_iter,
        "residual": state.residual if np.isfinite(state.residual) else "",
        "mass_drift": cons.mass_drift,
        "l2_drift": cons.l2_drift,
        "verdict": state.verdict,
    }
    payload = {
        "grid_fingerprint": _grid_fingerprint(grid),
        "diffs": state.diffs,
        "contraction_factors": state.contraction_factors,
        "verdict": state.verdict,
    }
    return [row], payload, state.converged


def _run_lifespan(params: dict, seed: int):
    r = float(params.get("r", 2.0))
    report = sol.lifespan_experiment(
        r=r,
        s=params.get("s"),
        lambdas=tuple(params.get("lambdas", (1.0, 1.45, 2.1, 3.0, 4.35, 6.3))),
        amplitude_power=float(params.get("amplitude_power", 1.0)),
        n_x=int(params.get("n_x", 1024)),
        length=float(params.get("length", 8.0 * np.pi)),
        n_t=int(params.get("n_t", 80)),
        rel_tol=float(params.get("rel_tol", 0.05)),
    )
    verdict = "PASS" if report.monotone else "FAIL"
    rows = [
        {
            "lam": p.lam,
            "norm": p.norm,
            "delta_star": p.delta_star,
            "slope": report.slope,
            "verdict": verdict,
        }
        for p in report.points
    ]
    payload = {
        "slope": report.slope,
        "predicted_slope": lifespan_exponent(min(r, 2.0)),
        "amplitude_power": report.amplitude_power,
        "monotone": report.monotone,
        "points": [[p.lam, p.norm, p.delta_star] for p in report.points],
    }
    return rows, payload, report.monotone


_RUNNERS = {
    "probe": _run_probe,
    "norm-suite": _run_norm_suite,
    "exponents": _run_exponents,
    "resonant-integral": _run_resonant,
    "solve": _run_solve,
    "lifespan": _run_lifespan,
}


def write_reports(out_dir: Path, experiment: str, rows, payload, cfg: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    cols = _COLUMNS[experiment]
    with open(out_dir / "report.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in cols])
    full = {
        "experiment": experiment,
        "config": cfg,
        "rows": rows,
        "payload": payload,
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(full, fh, sort_keys=True, indent=2, default=float)
        fh.write("\n")


def run(config_path: str, out: str | None = None, seed: int | None = None,
        grid_n: int | None = None, overrides: list[str] | None = None) -> int:
    try:
        cfg = load_config(config_path)
        if seed is not None:
            cfg["seed"] = seed
        params = dict(cfg.get("params", {}))
        for item in overrides or []:
            if "=" not in item:
                raise ConfigError(f"override must be key=value, got {item!r}")
            key, _, raw = item.partition("=")
            try:
                params[key] = json.loads(raw)
            except json.JSONDecodeError:
                params[key] = raw
        if grid_n is not None:
            exp = cfg["experiment"]
            if exp == "probe":
                params["grid_ns"] = [grid_n, 2 * grid_n, 4 * grid_n]
            elif exp == "norm-suite":
                params["grid_n"] = grid_n
            elif exp in ("solve", "lifespan"):
                params["n_x"] = grid_n
        cfg["params"] = params
        validate_config(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    out_dir = Path(out if out is not None else cfg.get("out", "."))
    exp = cfg["experiment"]
    runner = _RUNNERS[exp]
    try:
        rows, payload, ok = runner(cfg.get("params", {}), int(cfg.get("seed", 0)))
    except est.HypothesisError as e:
        print(f"hypothesis rejected: {e}", file=sys.stderr)
        return 3
    except (GridError, RangeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        write_reports(out_dir, exp, [], {"error": str(e)}, cfg)
        return 1
    write_reports(out_dir, exp, rows, payload, cfg)
    return 0 if ok else 1


def list_experiments() -> str:
    lines = ["experiments:"]
    for name in sorted(EXPERIMENTS):
        lines.append(f"  {name:18s} {_EXPERIMENT_ANCHORS[name]}")
    lines.append("probe estimate ids:")
    for eid in sorted(est.ESTIMATE_IDS):
        spec = est.default_spec(eid)
        defaults = ", ".join(
            f"{k}={_fmt(v)}"
            for k, v in sorted(vars(spec).items())
            if v is not None and k != "id"
        )
        lines.append(f"  {eid:12s} {_ESTIMATE_ANCHORS[eid]}")
        lines.append(f"  {'':12s}   defaults: {defaults}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mkdvlab", description="spectral estimate laboratory runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--grid-n", type=int, default=None, dest="grid_n")
    p_run.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    sub.add_parser("list", help="print the experiment catalog")
    args = parser.parse_args(argv)
    if args.command == "list":
        print(list_experiments())
        return 0
    return run(args.config, args.out, args.seed, args.grid_n, args.override)


if __name__ == "__main__":
    sys.exit(main())
