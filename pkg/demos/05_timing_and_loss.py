"""Two practical imperfections: timing jitter and losing an atom.

A timing error eps changes the state by the single-particle amplitude
R(eps)_00 per atom, so the tolerable error falls as 1/sqrt(N) and barely
depends on the ring size.  Losing an atom half way through is harmless
without interactions because every atom is in the same mode.
"""
# %%
import numpy as np

from ringsplit import experiments, splitter

for S in (3, 4, 5, 7, 9):
    tau = splitter.balance_time(S).tau
    c = experiments.critical_timing_error(S, 5, tau=tau)
    print(f"S={S}: eps_crit = {c.value:.4f}  eps/tau = {c.value / tau:.1e}")

res = experiments.timing_scaling(3, tuple(range(2, 21, 2)), tau=2 * np.pi / 9)
print("eps_crit ~ %.3f * N^%.3f" % (res.fit.coefficient, res.fit.exponent))

# %% Loss of one atom at tau/2, compared with starting from N-1 atoms.
for v in (0.0, 0.05, 0.2):
    r = experiments.loss_experiment(3, 4, v, 2 * np.pi / 9, loss_site=0)
    print(f"V/J = {v}: fidelity {r.fidelity:.6f} (loss weight {r.loss_weight:.3f})")
