"""
Perturbed push-sum.

One round with mixing matrix A(t):

    w <- A x,   y <- A y,   z_i <- w_i / y_i,   x <- w + eps(t+1)

Values may be d-dimensional; the scalar protocol runs coordinate-wise and
shares the single weight vector y.
"""

from dataclasses import dataclass

import numpy as np

from .graph import Digraph
from .mixing import build_mixing

__all__ = [
    "Y_GUARD",
    "PushSumUnderflow",
    "PushSumState",
    "ZeroPerturbation",
    "DecayingPerturbation",
    "SubgradientPerturbation",
    "SequencePerturbation",
    "PushSumTrace",
    "mix",
    "pushsum_round",
    "run_pushsum",
    "lemma1_bound",
    "lemma1_bounds",
    "corollary2_bound",
    "weighted_tracking_error",
]

Y_GUARD = 1e-300


class PushSumUnderflow(FloatingPointError):
    """Some y_i fell below the guard; the sequence is effectively disconnected."""


@dataclass
class PushSumState:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    t: int = 0
    eps: np.ndarray = None

    @classmethod
    def initial(cls, x0):
        """y(0) = 1 and w(0) = z(0) = x(0)."""
        x0 = np.array(x0, dtype=float)
        if x0.ndim == 1:
            x0 = x0[:, None]
        n, d = x0.shape
        return cls(x0, np.ones(n), x0.copy(), x0.copy(), 0, np.zeros((n, d)))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


class ZeroPerturbation:
    kind = "zero"

    def __call__(self, t, z):
        return np.zeros_like(z)


class DecayingPerturbation:
    """eps_i(t) = c * sign_i / t**power in every coordinate."""

    kind = "decaying-deterministic"

    def __init__(self, c, signs=None, power=0.5):
        self.c = float(c)
        self.signs = None if signs is None else np.asarray(signs, dtype=float)
        self.power = float(power)

    def __call__(self, t, z):
        e = np.full_like(z, self.c / t**self.power)
        if self.signs is not None:
            e *= self.signs[:, None]
        return e

    def l1_scale(self, n, d):
        """D with ||eps(t)||_1 <= D / t**power, summed over all nodes and coordinates."""
        s = np.ones(n) if self.signs is None else np.abs(self.signs)
        return abs(self.c) * d * float(s.sum())


class SubgradientPerturbation:
    """eps_i(t) = -alpha(t) g_i, with g_i a subgradient of f_i at z_i(t)."""

    kind = "subgradient-injected"

    def __init__(self, spec, schedule):
        self.spec = spec
        self.schedule = schedule

    def __call__(self, t, z):
        return -self.schedule(t) * self.spec.subgradients(z)


class SequencePerturbation:
    """Perturbations from an array indexed ``values[t]`` or a callable ``f(t, z)``."""

    kind = "custom-sequence"

    def __init__(self, values):
        self.values = values

    def __call__(self, t, z):
        if callable(self.values):
            return np.asarray(self.values(t, z), dtype=float).reshape(z.shape)
        return np.asarray(self.values[t], dtype=float).reshape(z.shape)


def mix(state, g):
    """The linear half of a round: (w, y, z) from x(t), y(t) and G(t)."""
    a = build_mixing(g) if isinstance(g, Digraph) else g
    if a.shape[0] != state.n:
        raise ValueError(f"graph has {a.shape[0]} nodes, state has {state.n}")
    w = a @ state.x
    y = a @ state.y
    if y.min() < Y_GUARD:
        i = int(np.argmin(y))
        raise PushSumUnderflow(f"y[{i}] = {y[i]:.3e} below {Y_GUARD:g} at round {state.t + 1}")
    return w, y, w / y[:, None]


def pushsum_round(state, g, eps):
    """
    Advance ``state`` by one round over ``g`` (a Digraph or a mixing matrix).

    Returns a new state; ``state`` is not modified.
    """
    w, y, z = mix(state, g)
    e = eps(state.t + 1, z)
    return PushSumState(w + e, y, w, z, state.t + 1, e)


@dataclass
class PushSumTrace:
    """
    Per-round arrays; index t holds the state after round t (t = 0 is the
    initial state, with eps[0] = 0).

    ``track_err[t]`` is ||z_i(t) - xbar(t-1)||_1 and is NaN at t = 0.
    """

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    eps: np.ndarray
    xbar: np.ndarray

    @property
    def T(self):
        return self.x.shape[0] - 1

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def d(self):
        return self.x.shape[2]

    @property
    def track_err(self):
        err = np.full((self.T + 1, self.n), np.nan)
        err[1:] = np.abs(self.z[1:] - self.xbar[:-1, None, :]).sum(axis=2)
        return err

    def x0_l1(self):
        return float(np.abs(self.x[0]).sum())

    def eps_l1(self):
        """||eps(t)||_1 for t = 0..T."""
        return np.abs(self.eps).sum(axis=(1, 2))

    def y_sum_error(self):
        return float(np.max(np.abs(self.y.sum(axis=1) - self.n)))

    def mass_identity_error(self):
        """
        Max relative gap between 1'x(t) and 1'x(0) + sum_{s<=t} 1'eps(s),
        relative to max(1, ||x(0)||_1 + sum_s ||eps(s)||_1).
        """
        lhs = self.x.sum(axis=1)
        rhs = self.x[0].sum(axis=0)[None, :] + np.cumsum(self.eps.sum(axis=1), axis=0)
        scale = max(1.0, self.x0_l1() + float(self.eps_l1().sum()))
        return float(np.max(np.abs(lhs - rhs))) / scale


def _allocate(T, n, d):
    return {
        "x": np.empty((T + 1, n, d)),
        "y": np.empty((T + 1, n)),
        "w": np.empty((T + 1, n, d)),
        "z": np.empty((T + 1, n, d)),
        "eps": np.zeros((T + 1, n, d)),
    }


def _record(buf, t, s):
    buf["x"][t] = s.x
    buf["y"][t] = s.y
    buf["w"][t] = s.w
    buf["z"][t] = s.z
    buf["eps"][t] = s.eps


def run_pushsum(seq, x0, eps, T):
    """Run ``T`` rounds of perturbed push-sum over ``seq`` from ``x0``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    state = PushSumState.initial(x0)
    if state.n != seq.n:
        raise ValueError(f"x0 has {state.n} rows, sequence has {seq.n} nodes")
    buf = _allocate(T, state.n, state.d)
    _record(buf, 0, state)
    for t in range(T):
        state = pushsum_round(state, seq.graph_at(t), eps)
        _record(buf, t + 1, state)
    return PushSumTrace(xbar=buf["x"].mean(axis=1), **buf)


def lemma1_bounds(trace, params):
    """
    Tracking bound for every t = 0..T-1:

        (8/delta) (lambda^t ||x(0)||_1 + sum_{s=1}^t lambda^(t-s) ||eps(s)||_1)

    Entry t bounds ``trace.track_err[t + 1]``.
    """
    lam = params.lam
    e = trace.eps_l1()
    conv = np.empty(trace.T)
    acc = 0.0
    for t in range(trace.T):
        if t > 0:
            acc = lam * acc + e[t]
        conv[t] = acc
    return (8.0 / params.delta) * (params.lam_pow(np.arange(trace.T)) * trace.x0_l1() + conv)


def lemma1_bound(trace, params, t):
    if not 0 <= t < trace.T:
        raise ValueError(f"t must lie in [0, {trace.T - 1}]")
    e = trace.eps_l1()
    s = np.arange(1, t + 1)
    conv = float(np.sum(params.lam_pow(t - s) * e[1:t + 1])) if t else 0.0
    return (8.0 / params.delta) * (params.lam_pow(t) * trace.x0_l1() + conv)


def corollary2_bound(trace, params, D, t):
    """
    4 (||x(0)||_1 + D (1 + ln t)) / (delta (1 - lambda) (sqrt(t+2) - 1)).

    ``D`` must bound the whole-vector norm: ||eps(s)||_1 <= D / sqrt(s).
    ``trace`` may also be the number ||x(0)||_1 itself.
    """
    x0_l1 = trace.x0_l1() if hasattr(trace, "x0_l1") else float(trace)
    if t < 1:
        raise ValueError("t must be >= 1")
    num = 4.0 * (x0_l1 + D * (1.0 + np.log(t)))
    with np.errstate(over="ignore", divide="ignore"):
        return float(num / (params.delta * params.one_minus_lam * (np.sqrt(t + 2.0) - 1.0)))


def weighted_tracking_error(trace, t, alphas=None):
    """
    sum_{k=0}^t alpha(k+1) |z_i(k+1) - xbar(k)| / sum_{k=0}^t alpha(k+1)
    per node, with alpha(k) = 1/sqrt(k) unless ``alphas`` (alpha(1)..) is given.
    """
    if not 0 <= t < trace.T:
        raise ValueError(f"t must lie in [0, {trace.T - 1}]")
    a = 1.0 / np.sqrt(np.arange(1, t + 2)) if alphas is None else np.asarray(alphas)[:t + 1]
    err = trace.track_err[1:t + 2]
    return (a[:, None] * err).sum(axis=0) / a.sum()
