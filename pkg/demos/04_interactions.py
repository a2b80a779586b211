"""How much interaction can the splitter tolerate?

We compare splitter + inverse splitter with and without on-site
interactions and find where the overlap drops to 0.95.  The tolerable
VN/J shrinks slowly with N and the tolerable V/J collapses with S.
"""
# %%
import numpy as np

from ringsplit import experiments

tau = 2 * np.pi / 9
scan = experiments.interaction_fidelity_scan(3, 6, np.linspace(0, 1.5, 7), tau=tau)
for vn, F in scan.data:
    print(f"VN/J = {vn:.2f}  F = {F:.4f}")

# %% Critical VN/J against N (a short sweep; the full one runs to N=40).
res = experiments.interaction_scaling(3, (2, 4, 8, 12, 16), tau=tau)
for n, v in res.data:
    print(f"N = {int(n):2d}  (VN/J)_crit = {v:.4f}")
print("fit: %.3f * N^%.3f" % (res.fit.coefficient, res.fit.exponent))

# %% Critical V/J at N=5 for growing rings.
lim = experiments.interaction_limit_vs_sites((3, 4, 5, 7), N=5)
for S, t, vn, v in lim.data:
    print(f"S = {int(S)}  tau = {t:8.2f}  V/J_crit = {v:.2e}")
