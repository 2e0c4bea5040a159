"""
Perturbed push-sum on a random directed sequence.

Every node injects a decaying disturbance c/sqrt(t) with alternating sign.
The ratio z_i = w_i / y_i still tracks the running network average, and the
tracking error shrinks along with the disturbance.
"""

import numpy as np

from subgradpush import (
    DecayingPerturbation,
    ZeroPerturbation,
    lemma1_bounds,
    make_sequence,
    run_pushsum,
    theoretical_params,
)

n, B, T = 10, 2, 5000
seq = make_sequence("random-B-connected", n, B, seed=42)
x0 = np.random.default_rng(0).normal(size=(n, 1))

# plain push-sum: geometric convergence to the initial average
tr = run_pushsum(seq, x0, ZeroPerturbation(), 200)
print("initial average      ", x0.mean())
print("max |z_i - avg| at 50 ", tr.track_err[50].max())
print("max |z_i - avg| at 200", tr.track_err[200].max())

# the worst-case bound holds, but it is loose by many orders of magnitude
bound = lemma1_bounds(tr, theoretical_params(n, B))
print("bound at t=50         ", bound[49])

# decaying disturbances
eps = DecayingPerturbation(1.0, signs=np.where(np.arange(n) % 2, -1.0, 1.0))
tr = run_pushsum(seq, x0, eps, T)
err = tr.track_err[1:].max(axis=1)
for t in (10, 100, 1000, T):
    print(f"t={t:5d}  max tracking error {err[t - 1]:.3e}")
print("sum y - n (max over run):", tr.y_sum_error())
