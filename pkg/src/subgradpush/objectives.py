"""
Local convex objectives with globally bounded subgradients.

Every family here is Lipschitz, so the subgradient-norm bound L_i holds at
all points. At kinks the oracle returns the zero coordinate, which is always
in the subdifferential there.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FAMILIES",
    "NoAnalyticOptimum",
    "ObjectiveSpec",
    "weighted_median_interval",
    "grid_search_optimum",
]

FAMILIES = ("abs-deviation", "l1-distance", "huber", "linear-clipped")


class NoAnalyticOptimum(LookupError):
    """The family has no closed-form minimizer; use :func:`grid_search_optimum`."""


def _finite(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite input point")
    return z


@dataclass
class ObjectiveSpec:
    """
    F(z) = sum_i f_i(z) over z in R^d.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    anchors : array_like, shape (n, d)
        Per-node reference points a_i (a 1-D array is read as d = 1).
    scales : array_like, shape (n,), optional
        Per-node weights s_i >= 0 (default 1). Zero scales give f_i = 0.
    width : float
        Huber transition width.
    directions : array_like, shape (n, d), optional
        Normals c_i for ``linear-clipped``, f_i(z) = s_i max(0, c_i'(z - a_i)).
    """

    family: str
    anchors: np.ndarray
    scales: np.ndarray = None
    width: float = 1.0
    directions: np.ndarray = None
    L: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown objective family {self.family!r}")
        a = np.asarray(self.anchors, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] < 1:
            raise ValueError("anchors must have shape (n, d)")
        self.anchors = _finite(a)
        n, d = a.shape
        s = np.ones(n) if self.scales is None else np.asarray(self.scales, dtype=float)
        if s.shape != (n,) or np.any(s < 0):
            raise ValueError("scales must be n non-negative numbers")
        self.scales = s
        if self.family == "abs-deviation" and d != 1:
            raise ValueError("abs-deviation is one-dimensional; use l1-distance for d > 1")
        if self.family == "huber" and not self.width > 0:
            raise ValueError("huber width must be > 0")
        if self.family == "linear-clipped":
            if self.directions is None:
                c = np.zeros((n, d))
                c[np.arange(n), np.arange(n) % d] = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
            else:
                c = np.asarray(self.directions, dtype=float).reshape(n, d)
            self.directions = _finite(c)
            self.L = s * np.linalg.norm(c, axis=1)
        elif self.family == "abs-deviation":
            self.L = s.copy()
        else:
            self.L = s * np.sqrt(d)

    @property
    def n(self):
        return self.anchors.shape[0]

    @property
    def d(self):
        return self.anchors.shape[1]

    def node_values(self, points):
        """f_i at each point; ``points`` (m, d) -> (m, n)."""
        p = _finite(points).reshape(-1, self.d)
        r = p[:, None, :] - self.anchors[None, :, :]
        if self.family in ("abs-deviation", "l1-distance"):
            v = np.abs(r).sum(axis=2)
        elif self.family == "huber":
            k = self.width
            ar = np.abs(r)
            v = np.where(ar <= k, r * r / (2 * k), ar - k / 2).sum(axis=2)
        else:
            v = np.maximum(0.0, np.einsum("mnd,nd->mn", r, self.directions))
        return v * self.scales[None, :]

    def value(self, i, z):
        return float(self.node_values(np.reshape(z, (1, self.d)))[0, i])

    def evaluate_F(self, z):
        """F(z) = sum_i f_i(z) at a single point."""
        return float(self.node_values(np.reshape(z, (1, self.d)))[0].sum())

    def evaluate_F_many(self, points):
        return self.node_values(points).sum(axis=1)

    def subgradients(self, z):
        """Row i is a subgradient of f_i at z[i]; ``z`` has shape (n, d)."""
        z = _finite(z).reshape(self.n, self.d)
        r = z - self.anchors
        if self.family in ("abs-deviation", "l1-distance"):
            g = np.sign(r)
        elif self.family == "huber":
            g = np.clip(r / self.width, -1.0, 1.0)
        else:
            active = np.einsum("nd,nd->n", r, self.directions) > 0
            g = np.where(active[:, None], self.directions, 0.0)
        return g * self.scales[:, None]

    def subgradient(self, i, z):
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for n={self.n}")
        z = np.broadcast_to(_finite(z).reshape(1, self.d), (self.n, self.d))
        return self.subgradients(z)[i].copy()

    def optimal_box(self):
        """
        Coordinate-wise bounds (lo, hi) of Z* for median-type families.

        Raises
        ------
        NoAnalyticOptimum
            For huber and linear-clipped.
        """
        if self.family not in ("abs-deviation", "l1-distance"):
            raise NoAnalyticOptimum(self.family)
        lo = np.empty(self.d)
        hi = np.empty(self.d)
        for k in range(self.d):
            lo[k], hi[k] = weighted_median_interval(self.anchors[:, k], self.scales)
        return lo, hi

    def optimum(self):
        """Representative z* (midpoint of Z*) and F* = F(z*)."""
        lo, hi = self.optimal_box()
        finite = np.isfinite(lo) & np.isfinite(hi)
        z = np.zeros(self.d)
        z[finite] = 0.5 * (lo[finite] + hi[finite])
        return z, self.evaluate_F(z)

    def dist_to_opt(self, points):
        """Euclidean distance from each point to the optimal box; (m, d) -> (m,)."""
        lo, hi = self.optimal_box()
        p = np.asarray(points, dtype=float).reshape(-1, self.d)
        gap = np.maximum(lo - p, 0.0) + np.maximum(p - hi, 0.0)
        return np.sqrt((gap * gap).sum(axis=1))


def weighted_median_interval(values, weights):
    """
    Minimizer set [lo, hi] of sum_k w_k |z - v_k|.

    Returns (-inf, inf) when all weights are zero.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= 0:
        return -np.inf, np.inf
    order = np.argsort(values, kind="stable")
    v, w = values[order], weights[order]
    uniq, start = np.unique(v, return_index=True)
    mass = np.add.reduceat(w, start)
    below = np.concatenate(([0.0], np.cumsum(mass)[:-1]))
    right_slope = 2 * (below + mass) - total
    eps = 1e-12 * total
    k = int(np.argmax(right_slope >= -eps))
    lo = hi = uniq[k]
    if abs(right_slope[k]) <= eps and k + 1 < uniq.size:
        hi = uniq[k + 1]
    return float(lo), float(hi)


def grid_search_optimum(spec, points_per_dim=None, refine=True, chunk=200_000):
    """
    Brute-force minimizer of F over the anchors' bounding box (d <= 2).

    Used as an oracle independent of the closed-form optimum. The default
    resolution is 10^4 points for d = 1 and 10^3 per axis for d = 2, followed
    by one refinement pass around the best cell.
    """
    if spec.d > 2:
        raise ValueError("grid search is limited to d <= 2")
    if points_per_dim is None:
        points_per_dim = 10_000 if spec.d == 1 else 1_000
    lo = spec.anchors.min(axis=0)
    hi = spec.anchors.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)

    def search(lo, hi):
        axes = [np.linspace(lo[k], hi[k], points_per_dim) for k in range(spec.d)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.d)
        best_f, best_z = np.inf, None
        for c in range(0, len(pts), chunk):
            block = pts[c:c + chunk]
            f = spec.evaluate_F_many(block)
            k = int(np.argmin(f))
            if f[k] < best_f:
                best_f, best_z = float(f[k]), block[k].copy()
        return best_z, best_f, (hi - lo) / (points_per_dim - 1)

    z, f, step = search(lo, hi)
    if refine:
        z2, f2, _ = search(z - step, z + step)
        if f2 <= f:
            z, f = z2, f2
    return z, f
