"""
Experiment orchestration: turn a :class:`RunConfig` into sequences,
objectives and runs, and write ``trace.csv`` / ``summary.json``.

CSV reals use ``repr`` (shortest round-trip form), so identical runs give
identical bytes and the files can be reloaded losslessly.
"""

import csv
import io
import json
import math
import os
import time

import numpy as np

from .config import ConfigError
from .graph import RegularCirculantSequence, make_sequence, window_verdicts
from .mixing import (
    ConnectivityParams,
    estimate_lambda,
    max_sigma2,
    measure_delta,
    theoretical_params,
)
from .objectives import ObjectiveSpec
from .pushsum import (
    DecayingPerturbation,
    SequencePerturbation,
    SubgradientPerturbation,
    ZeroPerturbation,
    lemma1_bounds,
    run_pushsum,
)
from .rng import philox
from .schedule import StepSchedule
from .sgp import run_sgp

__all__ = [
    "EXIT_OK",
    "EXIT_VIOLATION",
    "EXIT_CONFIG",
    "EXIT_RUNTIME",
    "build_sequence",
    "build_objective",
    "build_schedule",
    "build_x0",
    "build_perturbation",
    "connectivity_params",
    "state_csv",
    "pushsum_csv",
    "sgp_csv",
    "run_experiment",
]

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

# independent RNG streams derived from the run seed
_STREAM_X0, _STREAM_ANCHORS, _STREAM_VPOINTS = 1, 2, 3

Y_SUM_TOL = 1e-10
MASS_TOL = 1e-9


def build_sequence(cfg):
    g = dict(cfg.graph)
    model, B = g.pop("model"), g.pop("B", 1)
    return make_sequence(model, cfg.n, B, cfg.seed, **g)


def build_objective(cfg):
    if cfg.objective is None:
        raise ConfigError("this command needs an 'objective' section")
    o = cfg.objective
    anchors = o.get("anchors")
    if anchors is None:
        gen = o["generate"]
        rng = philox(cfg.seed, _STREAM_ANCHORS)
        lo, hi = gen.get("low", -5.0), gen.get("high", 5.0)
        if gen.get("integer", False):
            anchors = rng.integers(int(lo), int(hi) + 1, size=(cfg.n, cfg.d)).astype(float)
        else:
            anchors = rng.uniform(lo, hi, size=(cfg.n, cfg.d))
    anchors = np.asarray(anchors, dtype=float).reshape(cfg.n, cfg.d)
    return ObjectiveSpec(
        o["family"], anchors,
        scales=o.get("scales"),
        width=o.get("width", 1.0),
        directions=o.get("directions"),
    )


def build_schedule(cfg):
    s = cfg.schedule
    values = s.get("values")
    return StepSchedule(
        s["kind"], p=s.get("p", 0.5), offset=s.get("offset", 0.0),
        values=tuple(values) if values is not None else None,
    )


def build_x0(cfg, default="zeros"):
    """Explicit ``x0`` (scalar, n-list or n x d list); else zeros or a seeded normal draw."""
    shape = (cfg.n, cfg.d)
    if cfg.x0 is None:
        if default == "zeros":
            return np.zeros(shape)
        return philox(cfg.seed, _STREAM_X0).standard_normal(shape)
    x0 = np.asarray(cfg.x0, dtype=float)
    if x0.ndim == 0:
        return np.full(shape, float(x0))
    return x0.reshape(shape)


def build_perturbation(cfg, spec=None, sched=None):
    p = cfg.perturbation
    kind = p["kind"]
    if kind == "zero":
        return ZeroPerturbation()
    if kind == "decaying-deterministic":
        signs = p.get("signs")
        if signs == "alternate":
            signs = [1.0 if i % 2 == 0 else -1.0 for i in range(cfg.n)]
        return DecayingPerturbation(p["c"], signs=signs, power=p.get("power", 0.5))
    if kind == "subgradient-injected":
        return SubgradientPerturbation(spec if spec is not None else build_objective(cfg),
                                       sched if sched is not None else build_schedule(cfg))
    values = np.asarray(p["values"], dtype=float)
    return SequencePerturbation(values.reshape(values.shape[0], cfg.n, cfg.d))


def connectivity_params(cfg, seq, T=None):
    """
    Theoretical (delta, lambda, C) for the configured sequence, with any
    entries of ``cfg.params`` overriding them.
    """
    regular = isinstance(seq, RegularCirculantSequence)
    s2 = None
    if regular:
        s2 = max_sigma2(seq, T or cfg.T)
        s2 = s2 if s2 < 1.0 else None
    base = theoretical_params(seq.n, seq.B, regular=regular, sigma2_max=s2)
    if not cfg.params:
        return base
    delta = cfg.params.get("delta", base.delta)
    C = cfg.params.get("C", base.C)
    if "lambda" in cfg.params:
        return ConnectivityParams.from_lambda(delta, cfg.params["lambda"], C, "override")
    return ConnectivityParams(delta, base.log_lam, C, "override")


def _fmt(v):
    return repr(float(v))


def _write_rows(fh, header, columns):
    """``columns`` are flat arrays in (t, node, coord) row-major order."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    cols = [list(map(_fmt, np.asarray(c).ravel().tolist())) for c in columns[3:]]
    w.writerows(zip(*[np.asarray(c).ravel().tolist() for c in columns[:3]], *cols))


def _index_columns(T, n, d):
    t, i, k = np.meshgrid(np.arange(T + 1), np.arange(1, n + 1), np.arange(1, d + 1), indexing="ij")
    return [t, i, k]


def _per_node(a, d):
    return np.repeat(np.asarray(a)[:, :, None], d, axis=2)


def _per_round(a, n, d):
    a = np.asarray(a)
    if a.ndim == 1:
        return np.broadcast_to(a[:, None, None], (a.shape[0], n, d))
    return np.broadcast_to(a[:, None, :], (a.shape[0], n, d))


def state_csv(trace, fh=None):
    """Shared columns t,node,coord,x,y,z,xbar of push-sum and subgradient-push traces."""
    out = fh or io.StringIO()
    T, n, d = trace.T, trace.n, trace.d
    _write_rows(out, ["t", "node", "coord", "x", "y", "z", "xbar"],
                _index_columns(T, n, d) + [trace.x, _per_node(trace.y, d), trace.z,
                                           _per_round(trace.xbar, n, d)])
    return out.getvalue() if fh is None else None


def pushsum_csv(trace, bounds, fh):
    """
    Row t: x(t), y(t), z(t), eps(t), xbar(t); ``track_err`` is
    |z_i(t) - xbar(t-1)|_1 and ``lemma1_bound`` its bound, both NaN at t = 0.
    """
    T, n, d = trace.T, trace.n, trace.d
    lb = np.concatenate(([np.nan], bounds))
    _write_rows(fh, ["t", "node", "coord", "x", "y", "z", "eps", "xbar", "track_err", "lemma1_bound"],
                _index_columns(T, n, d) + [
                    trace.x, _per_node(trace.y, d), trace.z, trace.eps,
                    _per_round(trace.xbar, n, d), _per_node(trace.track_err, d),
                    _per_round(lb, n, d)])


def sgp_csv(trace, fh):
    T, n, d = trace.T, trace.n, trace.d
    nan_round = np.full(T + 1, np.nan)
    nan_node = np.full((T + 1, n), np.nan)
    cols = [
        trace.x, _per_node(trace.y, d), trace.z, trace.ztilde,
        _per_round(trace.xbar, n, d),
        _per_round(trace.F_xbar, n, d),
        _per_node(trace.F_ztilde, d),
        _per_round(trace.consensus_radius, n, d),
        _per_node(trace.dist_to_opt if trace.dist_to_opt is not None else nan_node, d),
        _per_round(trace.th2_bound if trace.th2_bound is not None else nan_round, n, d),
        _per_round(trace.lemma8_residual_min if trace.lemma8_residual_min is not None else nan_round, n, d),
    ]
    _write_rows(fh, ["t", "node", "coord", "x", "y", "z", "ztilde", "xbar", "F_xbar", "F_ztilde",
                     "consensus_radius", "dist_to_opt", "th2_bound", "lemma8_residual_min"],
                _index_columns(T, n, d) + cols)


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _graphcheck(cfg, seq, out_dir, echo):
    k_max = cfg.windows or max(1, cfg.T // seq.B)
    verdicts = window_verdicts(seq, seq.B, k_max)
    lines = [f"window={k} connected={'true' if ok else 'false'}" for k, ok in enumerate(verdicts)]
    for line in lines:
        echo(line)
    if out_dir:
        with open(os.path.join(out_dir, "graphcheck.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
    bad = verdicts.count(False)
    return bad, {"B": seq.B, "windows": k_max, "disconnected_windows": bad,
                 "first_failure": verdicts.index(False) if bad else None}


def _bounds(cfg, seq, out_dir, echo):
    params = connectivity_params(cfg, seq)
    delta_m = measure_delta(seq, cfg.T)
    horizon = max(10, min(cfg.T, 500))
    lam_e = estimate_lambda(seq, 0, horizon)
    out = {
        "delta_theoretical": params.delta,
        "delta_measured": delta_m,
        "lambda_theoretical": params.lam,
        "lambda_empirical": lam_e,
        "C": params.C,
    }
    echo(json.dumps(out))
    bad = int(delta_m < params.delta) + int(lam_e > params.lam)
    return bad, {**out, "one_minus_lambda_theoretical": params.one_minus_lam,
                 "provenance": params.provenance}


def _pushsum(cfg, seq, out_dir, echo):
    params = connectivity_params(cfg, seq)
    x0 = build_x0(cfg, default="normal")
    eps = build_perturbation(cfg)
    trace = run_pushsum(seq, x0, eps, cfg.T)
    bounds = lemma1_bounds(trace, params)
    err = trace.track_err[1:]
    l1_viol = int((err > bounds[:, None]).sum())
    y_err = trace.y_sum_error()
    mass = trace.mass_identity_error()
    if out_dir:
        with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
            pushsum_csv(trace, bounds, fh)
    summary = {
        "max_track_err": float(err.max()),
        "max_track_err_after_round1": float(err[1:].max()) if len(err) > 1 else None,
        "final_max_track_err": float(err[-1].max()),
        "lemma1_violations": l1_viol,
        "y_sum_error": y_err,
        "mass_identity_error": mass,
        "min_y": float(trace.y.min()),
        "delta_theoretical": params.delta,
        "lambda_theoretical": params.lam,
    }
    bad = l1_viol + int(y_err > Y_SUM_TOL) + int(mass > MASS_TOL)
    return bad, summary


def _v_points(cfg, spec):
    pts = []
    if cfg.lemma8_points is not None:
        pts.extend(np.asarray(cfg.lemma8_points, dtype=float).reshape(-1, cfg.d).tolist())
    if cfg.lemma8_random_points:
        lo, hi = spec.anchors.min(axis=0) - 1.0, spec.anchors.max(axis=0) + 1.0
        rng = philox(cfg.seed, _STREAM_VPOINTS)
        pts.extend(rng.uniform(lo, hi, size=(cfg.lemma8_random_points, cfg.d)).tolist())
    return pts


def _optimize(cfg, seq, out_dir, echo):
    spec = build_objective(cfg)
    sched = build_schedule(cfg)
    x0 = build_x0(cfg, default="zeros")
    monitors = cfg.monitors
    if monitors is None:
        monitors = ["avdone", "ztilde", "lemma8"]
        if sched.is_inv_sqrt:
            monitors += ["theorem2", "lemma9"]
    params = connectivity_params(cfg, seq) if {"theorem2", "lemma9"} & set(monitors) else None
    extra = _v_points(cfg, spec)
    v_points = None
    if extra:
        base = [np.zeros(cfg.d)]
        try:
            base.insert(0, spec.optimum()[0])
        except LookupError:
            pass
        v_points = np.array([*map(list, base), *extra])
    trace = run_sgp(seq, spec, sched, x0, cfg.T, monitors=monitors, params=params, v_points=v_points)
    if out_dir:
        with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
            sgp_csv(trace, fh)
    radius = float(trace.consensus_radius[-1])
    dist = float(trace.dist_to_opt[-1].max()) if trace.dist_to_opt is not None else None
    summary = {
        "final_z": trace.z[-1].tolist(),
        "final_ztilde": trace.ztilde[-1].tolist(),
        "final_xbar": trace.xbar[-1].tolist(),
        "F_star": _finite_or_none(trace.F_star) if trace.F_star is not None else None,
        "z_star": trace.z_star.tolist() if trace.z_star is not None else None,
        "final_F_xbar": float(trace.F_xbar[-1]),
        "final_F_ztilde": trace.F_ztilde[-1].tolist(),
        "consensus_radius": radius,
        "dist_to_opt": dist,
        "consensus_ok": radius < cfg.thresholds["consensus_tol"],
        "opt_ok": dist is not None and dist < cfg.thresholds["opt_tol"],
        "monitors": {k: {kk: vv for kk, vv in v.items() if kk != "points"} for k, v in trace.monitors.items()},
        "violations": trace.violations(),
    }
    return trace.violations(), summary


_COMMANDS = {
    "graphcheck": _graphcheck,
    "bounds": _bounds,
    "pushsum": _pushsum,
    "optimize": _optimize,
}


def run_experiment(cfg, command, out_dir=None, echo=print):
    """
    Run one subcommand pipeline and write its artifacts.

    Returns
    -------
    status : int
        ``EXIT_OK`` or ``EXIT_VIOLATION`` (any monitor violation).
    summary : dict
    """
    if command not in _COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    out_dir = out_dir or cfg.out_dir
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    seq = build_sequence(cfg)
    start = time.perf_counter()
    bad, summary = _COMMANDS[command](cfg, seq, out_dir, echo)
    summary = {"command": command, "seed": cfg.seed, "n": cfg.n, "d": cfg.d, "T": cfg.T,
               **summary, "violation_count": int(bad),
               "runtime_s": round(time.perf_counter() - start, 3)}
    if out_dir:
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, allow_nan=False, default=_json_default)
            fh.write("\n")
    return (EXIT_VIOLATION if bad else EXIT_OK), summary


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))
