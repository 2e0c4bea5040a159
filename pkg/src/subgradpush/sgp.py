"""
Subgradient-push: push-sum whose perturbation is a subgradient step,

    x_i(t+1) = w_i(t+1) - alpha(t+1) g_i(t+1),   g_i(t+1) in df_i(z_i(t+1)),

plus the alpha-weighted running average ztilde and post-run monitors for the
per-step descent inequality, the running-average bound and the O(ln t/sqrt t)
rate bound.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .objectives import NoAnalyticOptimum, grid_search_optimum
from .pushsum import PushSumState, mix

__all__ = [
    "MONITORS",
    "SgpRunState",
    "SgpTrace",
    "sgp_round",
    "run_sgp",
    "lemma_key_monitor",
    "lemma_key_residuals",
    "theorem2_bound",
    "lemma9_bound",
]

MONITORS = ("avdone", "ztilde", "lemma8", "theorem2", "lemma9")

AVDONE_TOL = 1e-10
ZTILDE_TOL = 1e-10
LEMMA8_TOL = 1e-9


@dataclass
class SgpRunState:
    push: PushSumState
    ztilde: np.ndarray
    S: float = 0.0
    g: np.ndarray = None
    alpha: float = math.nan

    @classmethod
    def initial(cls, x0):
        push = PushSumState.initial(x0)
        return cls(push, np.full_like(push.x, np.nan))

    @property
    def t(self):
        return self.push.t


def sgp_round(state, g, spec, sched):
    """One synchronous round of subgradient-push; returns a new state."""
    w, y, z = mix(state.push, g)
    t1 = state.t + 1
    alpha = sched(t1)
    grad = spec.subgradients(z)
    eps = -alpha * grad
    push = PushSumState(w + eps, y, w, z, t1, eps)
    S = state.S + alpha
    if state.t == 0:
        ztilde = z.copy()
    else:
        ztilde = (alpha * z + state.S * state.ztilde) / S
    return SgpRunState(push, ztilde, S, grad, alpha)


@dataclass
class SgpTrace:
    """
    Per-round arrays; index t is the state after round t (t = 0 initial).

    Quantities defined only from round 1 on (g, alpha, ztilde, F_ztilde,
    bounds and residuals) are NaN at t = 0. Transition-indexed monitor
    arrays (``lemma8_residual_min``) sit at the round they lead into.
    """

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    eps: np.ndarray
    g: np.ndarray
    alpha: np.ndarray
    S: np.ndarray
    ztilde: np.ndarray
    xbar: np.ndarray
    spec: object = field(repr=False, default=None)
    z_star: np.ndarray = None
    F_star: float = None
    exact_optimum: bool = False
    F_xbar: np.ndarray = None
    F_ztilde: np.ndarray = None
    consensus_radius: np.ndarray = None
    dist_to_opt: np.ndarray = None
    xhat: np.ndarray = None
    th2_bound: np.ndarray = None
    lemma9: np.ndarray = None
    lemma8_residual_min: np.ndarray = None
    monitors: dict = field(default_factory=dict)

    @property
    def T(self):
        return self.x.shape[0] - 1

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def d(self):
        return self.x.shape[2]

    def violations(self):
        return sum(m["violations"] for m in self.monitors.values())


def _consensus_radius(z, chunk=512):
    out = np.empty(z.shape[0])
    for c in range(0, z.shape[0], chunk):
        b = z[c:c + chunk]
        diff = b[:, :, None, :] - b[:, None, :, :]
        out[c:c + chunk] = np.sqrt((diff * diff).sum(axis=3)).max(axis=(1, 2))
    return out


def lemma_key_residuals(trace, v):
    """
    RHS - LHS of the per-step inequality for every t = 0..T-1:

        |xbar(t+1) - v|^2 <= |xbar(t) - v|^2 - (2a/n)(F(xbar(t)) - F(v))
                             + (4a/n) sum_i L_i |z_i(t+1) - xbar(t)|
                             + a^2 (sum_i L_i)^2 / n^2,      a = alpha(t+1).
    """
    spec = trace.spec
    n = trace.n
    v = np.asarray(v, dtype=float).reshape(trace.d)
    L = spec.L
    a = trace.alpha[1:]
    xb = trace.xbar
    lhs = ((xb[1:] - v) ** 2).sum(axis=1)
    F_xbar = trace.F_xbar if trace.F_xbar is not None else spec.evaluate_F_many(xb)
    track = np.sqrt(((trace.z[1:] - xb[:-1, None, :]) ** 2).sum(axis=2))
    rhs = (
        ((xb[:-1] - v) ** 2).sum(axis=1)
        - (2 * a / n) * (F_xbar[:-1] - spec.evaluate_F(v))
        + (4 * a / n) * (track * L[None, :]).sum(axis=1)
        + a * a * L.sum() ** 2 / n**2
    )
    return rhs - lhs


def lemma_key_monitor(trace, v, t):
    """Residual (RHS - LHS) of the per-step inequality for round t -> t+1."""
    if not 0 <= t < trace.T:
        raise ValueError(f"t must lie in [0, {trace.T - 1}]")
    return float(lemma_key_residuals(trace, v)[t])


def _check_schedule(schedule):
    if schedule is not None and not schedule.is_inv_sqrt:
        raise ValueError("rate bounds require alpha(t) = 1/sqrt(t)")


def _bound_inputs(spec, x0, z_star):
    x0 = np.asarray(x0, dtype=float).reshape(spec.n, spec.d)
    z_star = np.asarray(z_star, dtype=float).reshape(spec.d)
    return (
        spec.n,
        float(np.abs(x0.mean(axis=0) - z_star).sum()),
        float(spec.L.sum()),
        float((spec.L**2).sum()),
        float(np.abs(x0).sum()),
    )


def theorem2_bound(spec, params, x0, z_star, t, schedule=None):
    """
    Rate bound on F(ztilde_i(t)) - F* for alpha(t) = 1/sqrt(t), t >= 1:

        (n/2)|xbar(0) - z*|_1 / sqrt(t) + (n/2)((sum L)^2/4)(1 + ln t)/sqrt(t)
        + 16/(delta(1-lambda)) (sum L)(sum_j |x_j(0)|_1) / sqrt(t)
        + 16/(delta(1-lambda)) (sum L^2)(1 + ln t) / sqrt(t)

    ``t`` may be an array.
    """
    _check_schedule(schedule)
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise ValueError("t must be >= 1")
    n, dev, sL, sL2, x0n = _bound_inputs(spec, x0, z_star)
    rt = np.sqrt(t)
    lg = 1.0 + np.log(t)
    with np.errstate(over="ignore", divide="ignore"):
        k = 16.0 / (params.delta * params.one_minus_lam)
        out = (n / 2) * dev / rt + (n / 2) * (sL**2 / 4) * lg / rt + k * sL * x0n / rt + k * sL2 * lg / rt
    return out if out.ndim else float(out)


def lemma9_bound(spec, params, x0, z_star, t, schedule=None):
    """
    Bound on F(sum_k alpha(k+1) xbar(k) / S(t+1)) - F*, k = 0..t, t >= 1:

        (n/4)|xbar(0) - z*|_1 / r + (sum L)^2 (1 + ln t) / (4 n r)
        + 8 ((sum L)(sum_j |x_j(0)|_1) + (sum L^2)(1 + ln t)) / (delta(1-lambda) r)

    with r = sqrt(t+2) - 1. The first term is unsquared, as displayed.
    """
    _check_schedule(schedule)
    t = np.asarray(t, dtype=float)
    if np.any(t < 1):
        raise ValueError("t must be >= 1")
    n, dev, sL, sL2, x0n = _bound_inputs(spec, x0, z_star)
    r = np.sqrt(t + 2.0) - 1.0
    lg = 1.0 + np.log(t)
    with np.errstate(over="ignore", divide="ignore"):
        k = 8.0 / (params.delta * params.one_minus_lam)
        out = (n / 4) * dev / r + sL**2 * lg / (4 * n * r) + k * (sL * x0n + sL2 * lg) / r
    return out if out.ndim else float(out)


def _resolve_optimum(spec, z_star, F_star):
    if z_star is not None:
        z_star = np.asarray(z_star, dtype=float).reshape(spec.d)
        return z_star, spec.evaluate_F(z_star) if F_star is None else F_star, False
    try:
        z, f = spec.optimum()
        return z, f, True
    except NoAnalyticOptimum:
        if spec.d > 2:
            return None, None, False
        z, f = grid_search_optimum(spec)
        return z, f, False


def run_sgp(seq, spec, sched, x0=None, T=1000, monitors=(), params=None,
            v_points=None, z_star=None, F_star=None):
    """
    Run ``T`` rounds of subgradient-push and evaluate the requested monitors.

    Parameters
    ----------
    seq : GraphSequence
    spec : ObjectiveSpec
    sched : StepSchedule
    x0 : array_like, shape (n, d), optional
        Initial values, zero by default.
    monitors : iterable of str
        Subset of ``MONITORS``. Monitors only read the finished trace.
    params : ConnectivityParams, optional
        Needed by ``theorem2`` and ``lemma9``.
    v_points : array_like, shape (m, d), optional
        Comparison points for ``lemma8``; defaults to z* and the origin.
    z_star, F_star : optional
        Optimal point/value; computed from the objective when omitted.

    Returns
    -------
    SgpTrace
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    unknown = set(monitors) - set(MONITORS)
    if unknown:
        raise ValueError(f"unknown monitors: {sorted(unknown)}")
    n, d = spec.n, spec.d
    if seq.n != n:
        raise ValueError(f"objective has {n} nodes, sequence has {seq.n}")
    x0 = np.zeros((n, d)) if x0 is None else np.asarray(x0, dtype=float).reshape(n, d)

    shape = (T + 1, n, d)
    buf = {k: np.empty(shape) for k in ("x", "w", "z")}
    buf["y"] = np.empty((T + 1, n))
    buf["eps"] = np.zeros(shape)
    buf["g"] = np.full(shape, np.nan)
    buf["ztilde"] = np.full(shape, np.nan)
    buf["alpha"] = np.full(T + 1, np.nan)
    buf["S"] = np.zeros(T + 1)

    state = SgpRunState.initial(x0)
    for t in range(T + 1):
        if t > 0:
            state = sgp_round(state, seq.graph_at(t - 1), spec, sched)
            buf["g"][t] = state.g
            buf["ztilde"][t] = state.ztilde
            buf["alpha"][t] = state.alpha
            buf["S"][t] = state.S
        p = state.push
        buf["x"][t], buf["y"][t], buf["w"][t], buf["z"][t], buf["eps"][t] = p.x, p.y, p.w, p.z, p.eps

    trace = SgpTrace(xbar=buf["x"].mean(axis=1), spec=spec, **buf)
    trace.z_star, trace.F_star, trace.exact_optimum = _resolve_optimum(spec, z_star, F_star)
    _derive(trace)
    for name in monitors:
        trace.monitors[name] = _MONITOR_FUNCS[name](trace, sched, params, v_points)
    return trace


def _derive(trace):
    spec = trace.spec
    T, n, d = trace.T, trace.n, trace.d
    trace.F_xbar = spec.evaluate_F_many(trace.xbar)
    zt = trace.ztilde[1:].reshape(-1, d)
    trace.F_ztilde = np.full((T + 1, n), np.nan)
    trace.F_ztilde[1:] = spec.evaluate_F_many(zt).reshape(T, n)
    trace.consensus_radius = _consensus_radius(trace.z)
    if trace.z_star is not None:
        if trace.exact_optimum:
            dist = spec.dist_to_opt(trace.z.reshape(-1, d))
        else:
            dist = np.sqrt(((trace.z.reshape(-1, d) - trace.z_star) ** 2).sum(axis=1))
        trace.dist_to_opt = dist.reshape(T + 1, n)
    # alpha-weighted average of xbar(0..t), index t = 0..T-1
    a = trace.alpha[1:]
    trace.xhat = np.cumsum(a[:, None] * trace.xbar[:-1], axis=0) / trace.S[1:, None]


def _mon_avdone(trace, sched, params, v_points):
    pred = trace.xbar[:-1] - (trace.alpha[1:, None] / trace.n) * trace.g[1:].sum(axis=1)
    scale = np.maximum(1.0, np.abs(trace.xbar[:-1]).max(axis=1))
    resid = np.abs(trace.xbar[1:] - pred).max(axis=1) / scale
    return {"violations": int((resid > AVDONE_TOL).sum()), "worst": float(resid.max())}


def _mon_ztilde(trace, sched, params, v_points):
    closed = np.cumsum(trace.alpha[1:, None, None] * trace.z[1:], axis=0) / trace.S[1:, None, None]
    gap = np.abs(closed - trace.ztilde[1:]).max(axis=(1, 2))
    return {"violations": int((gap > ZTILDE_TOL).sum()), "worst": float(gap.max())}


def _mon_lemma8(trace, sched, params, v_points):
    if v_points is None:
        pts = [np.zeros(trace.d)]
        if trace.z_star is not None:
            pts.insert(0, trace.z_star)
        v_points = np.array(pts)
    v_points = np.asarray(v_points, dtype=float).reshape(-1, trace.d)
    res = np.stack([lemma_key_residuals(trace, v) for v in v_points])
    rmin = res.min(axis=0)
    trace.lemma8_residual_min = np.concatenate(([np.nan], rmin))
    return {
        "violations": int((rmin < -LEMMA8_TOL).sum()),
        "worst": float(rmin.min()),
        "points": v_points.tolist(),
    }


def _need(trace, sched, params, what):
    if params is None:
        raise ValueError(f"{what} monitor needs connectivity params")
    if trace.z_star is None:
        raise ValueError(f"{what} monitor needs an optimal point")
    _check_schedule(sched)


def _mon_theorem2(trace, sched, params, v_points):
    _need(trace, sched, params, "theorem2")
    t = np.arange(1, trace.T + 1)
    bound = theorem2_bound(trace.spec, params, trace.x[0], trace.z_star, t)
    trace.th2_bound = np.concatenate(([np.nan], bound))
    gap = trace.F_ztilde[1:] - trace.F_star
    excess = gap - bound[:, None]
    return {"violations": int((excess > 0).sum()), "worst": float(excess.max())}


def _mon_lemma9(trace, sched, params, v_points):
    _need(trace, sched, params, "lemma9")
    t = np.arange(1, trace.T)
    bound = lemma9_bound(trace.spec, params, trace.x[0], trace.z_star, t)
    trace.lemma9 = np.concatenate(([np.nan], bound))
    gap = trace.spec.evaluate_F_many(trace.xhat[1:]) - trace.F_star
    excess = gap - bound
    return {"violations": int((excess > 0).sum()), "worst": float(excess.max()) if excess.size else -math.inf}


_MONITOR_FUNCS = {
    "avdone": _mon_avdone,
    "ztilde": _mon_ztilde,
    "lemma8": _mon_lemma8,
    "theorem2": _mon_theorem2,
    "lemma9": _mon_lemma9,
}
