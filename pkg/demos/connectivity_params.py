"""
How pessimistic are the worst-case connectivity constants?

Compares the guaranteed delta = n^-nB and lambda with what a random sequence
actually achieves, and the regular (circulant) case where delta = 1 exactly.
"""

from subgradpush import estimate_lambda, make_sequence, measure_delta, theoretical_params
from subgradpush.mixing import max_sigma2

print(f"{'sequence':28s} {'delta th':>10} {'delta meas':>11} {'1-lam th':>10} {'lam fit':>8}")
for n, B in [(5, 1), (5, 3), (10, 2), (20, 1)]:
    seq = make_sequence("random-B-connected", n, B, seed=n + B)
    p = theoretical_params(n, B)
    print(f"{f'random n={n} B={B}':28s} {p.delta:10.2e} {measure_delta(seq, 400):11.4f} "
          f"{p.one_minus_lam:10.2e} {estimate_lambda(seq, 0, 300):8.4f}")

for c in (1, 2, 3):
    seq = make_sequence("regular-family", 9, 1, seed=0, c_min=c, c_max=c)
    s2 = max_sigma2(seq, 1)
    p = theoretical_params(9, 1, regular=True, sigma2_max=s2)
    print(f"{f'circulant n=9 c={c}':28s} {p.delta:10.2e} {measure_delta(seq, 400):11.4f} "
          f"{p.one_minus_lam:10.2e} {estimate_lambda(seq, 0, 300):8.4f}")
