"""
Column-stochastic mixing matrices, their products, and the consensus
parameters (delta, lambda, C) that govern push-sum tracking bounds.

``A[i, j] = 1/d_j`` whenever j is an in-neighbor of i (self included), so
``1' A = 1'`` and ``w = A @ x`` is exactly one round of broadcast push-sum.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "build_mixing",
    "column_sum_error",
    "ProductAccumulator",
    "ConnectivityParams",
    "theoretical_params",
    "sigma2",
    "max_sigma2",
    "measure_delta",
    "column_spread_curve",
    "estimate_lambda",
    "estimate_phi",
    "check_product_decay",
]

SPREAD_FLOOR = 1e-13


def build_mixing(g):
    """Return the n x n matrix A(t) for digraph ``g``."""
    n = g.n
    m = np.eye(n)
    for i, j in g.edges:
        m[j, i] = 1.0
    return m / g.out_degrees()[None, :].astype(float)


def column_sum_error(a):
    return float(np.max(np.abs(a.sum(axis=0) - 1.0)))


class ProductAccumulator:
    """
    Running product A(t:s) = A(t) ... A(s), extended on the left.

    With ``track_drift`` the largest column-sum deviation seen so far is kept
    in ``drift``; the product itself is never renormalized.
    """

    def __init__(self, a, s=0, track_drift=False):
        self.product = np.array(a, dtype=float)
        if self.product.ndim != 2 or self.product.shape[0] != self.product.shape[1]:
            raise ValueError("mixing matrix must be square")
        self.n = self.product.shape[0]
        self.s = s
        self.t = s
        self.track_drift = track_drift
        self.drift = column_sum_error(self.product) if track_drift else None

    def accumulate(self, a):
        if a.shape != self.product.shape:
            raise ValueError(f"dimension mismatch: {a.shape} vs {self.product.shape}")
        self.product = a @ self.product
        self.t += 1
        if self.track_drift:
            self.drift = max(self.drift, column_sum_error(self.product))
        return self

    def row_sums(self):
        return self.product.sum(axis=1)


@dataclass(frozen=True)
class ConnectivityParams:
    """
    (delta, lambda, C) for a graph sequence.

    lambda is stored as its logarithm: for general B-connected sequences it is
    1 - O(n^-nB), which rounds to 1.0 in double precision long before
    ``1 - lambda`` stops mattering. lambda = 0 (log = -inf) is allowed and
    means one-step consensus.
    """

    delta: float
    log_lam: float
    C: float
    provenance: str = "empirical"

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.log_lam < 0.0:
            raise ValueError("lambda must be < 1")
        if not self.C > 0.0:
            raise ValueError("C must be > 0")

    @classmethod
    def from_lambda(cls, delta, lam, C, provenance="empirical"):
        if not 0.0 <= lam < 1.0:
            raise ValueError(f"lambda must lie in [0, 1), got {lam}")
        return cls(delta, math.log(lam) if lam > 0 else -math.inf, C, provenance)

    @property
    def lam(self):
        return math.exp(self.log_lam)

    @property
    def one_minus_lam(self):
        return -math.expm1(self.log_lam)

    def lam_pow(self, k):
        """lambda**k for integer or array k >= 0, with lambda**0 == 1."""
        k = np.asarray(k, dtype=float)
        with np.errstate(invalid="ignore"):
            out = np.exp(k * self.log_lam)
        out = np.where(k == 0, 1.0, out)
        return out if out.ndim else float(out)


def theoretical_params(n, B, regular=False, sigma2_max=None):
    """
    Worst-case (delta, lambda, C) for a B-connected sequence on n nodes.

    General: delta = n^-nB, lambda = (1 - n^-nB)^(1/(nB)), C = 4.
    Regular: delta = 1, lambda = min((1 - 1/(4n^3))^(1/B), sqrt(sigma2_max)),
    C = 2*sqrt(2), or C = 2 when the singular-value branch is the smaller one.
    """
    if n < 1 or B < 1:
        raise ValueError("n and B must be >= 1")
    if not regular:
        nb = n * B
        delta = math.exp(-nb * math.log(n))
        if delta == 0.0:
            raise ValueError(f"n^-nB underflows double precision for n={n}, B={B}")
        log_lam = math.log1p(-delta) / nb if delta < 1.0 else -math.inf
        return ConnectivityParams(delta, log_lam, 4.0, "theoretical-general")
    log_lam = math.log1p(-1.0 / (4.0 * n**3)) / B
    C = 2.0 * math.sqrt(2.0)
    if sigma2_max is not None:
        if not 0.0 <= sigma2_max < 1.0:
            raise ValueError("sigma2_max must lie in [0, 1)")
        alt = 0.5 * math.log(sigma2_max) if sigma2_max > 0 else -math.inf
        if alt < log_lam:
            log_lam, C = alt, 2.0
    return ConnectivityParams(1.0, log_lam, C, "theoretical-regular")


def sigma2(a):
    """Second-largest singular value (0 for 1 x 1)."""
    s = np.linalg.svd(np.asarray(a, dtype=float), compute_uv=False)
    return float(s[1]) if s.size > 1 else 0.0


def max_sigma2(seq, T, start=0):
    return max(sigma2(build_mixing(seq.graph_at(t))) for t in range(start, start + T))


def measure_delta(seq, T, start=0):
    """
    Smallest row sum of A(t:start) over t = start .. start+T-1.

    This is the minimum entry of y(t) = A(t-1) ... A(start) 1 over the first
    T rounds of push-sum started from y = 1.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    y = np.ones(seq.n)
    best = 1.0
    for t in range(start, start + T):
        y = build_mixing(seq.graph_at(t)) @ y
        best = min(best, float(y.min()))
    return best


def column_spread_curve(seq, s, T):
    """
    e(t) = max_j (max_i - min_i) of column j of A'(t) ... A'(s), t = s..T.

    These products converge to 1 phi'(s), so every column flattens out.
    """
    p = np.eye(seq.n)
    out = np.empty(T - s + 1)
    for k, t in enumerate(range(s, T + 1)):
        p = build_mixing(seq.graph_at(t)).T @ p
        out[k] = float(np.max(p.max(axis=0) - p.min(axis=0)))
    return out


def estimate_lambda(seq, s=0, T=200, floor=SPREAD_FLOOR):
    """
    Fitted geometric decay rate of the column spread of backward products.

    Least-squares fit of log e(t) against t - s over samples above ``floor``.
    Exact one-step consensus (e == 0 from the first sample) reports 0.
    """
    if T - s < 10:
        raise ValueError("horizon too short: need T - s >= 10")
    e = column_spread_curve(seq, s, T)
    if e[0] == 0.0:
        return 0.0
    if e[0] <= floor:
        raise ValueError("column spread already below the numerical floor at the first sample")
    keep = np.nonzero(e > floor)[0]
    if keep.size < 2:
        return 0.0
    slope = np.polyfit(keep.astype(float), np.log(e[keep]), 1)[0]
    return float(min(math.exp(slope), 1.0))


def estimate_phi(seq, t, tol=1e-12):
    """
    Approximate phi(t) as the common column of A(t:s) for s far enough back.

    Products are extended to the right (s = t, t-1, ..., 0) until the column
    spread drops below ``tol`` or s reaches 0.

    Returns
    -------
    phi : ndarray
    spread : float
        Remaining max row spread; an upper bound on the truncation error.
    """
    p = build_mixing(seq.graph_at(t))
    s = t
    while True:
        spread = float(np.max(p.max(axis=1) - p.min(axis=1)))
        if spread < tol or s == 0:
            return p.mean(axis=1), spread
        s -= 1
        p = p @ build_mixing(seq.graph_at(s))


def check_product_decay(seq, t, params, tol=1e-12):
    """
    Count entries with |[A(t:s)]_ij - phi_i(t)| > C lambda^(t-s) over s = t..0.

    Returns
    -------
    violations : int
    phi : ndarray
    phi_err : float
    """
    phi, phi_err = estimate_phi(seq, t, tol)
    p = np.eye(seq.n)
    violations = 0
    for s in range(t, -1, -1):
        p = p @ build_mixing(seq.graph_at(s))
        dev = np.abs(p - phi[:, None]).max()
        if dev > params.C * params.lam_pow(t - s) + phi_err + 1e-12:
            violations += 1
    return violations, phi, phi_err
