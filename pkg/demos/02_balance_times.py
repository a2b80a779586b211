"""Searching for balanced splitters on larger rings.

The balance measure chi is the squared distance of the transfer-matrix
moduli from 1/sqrt(S).  It is cheap to evaluate in closed form, so we scan
a fine grid and polish the best dips.  Even rings deserve a look too: S=4
balances at pi/4, S=6 never does.
"""
# %%
import numpy as np

from ringsplit import experiments, splitter

for S in (3, 4, 5, 7, 9):
    r = splitter.balance_time(S)
    print(f"S={S}: tau = {r.tau:10.4f} = {r.tau / np.pi:8.4f} pi  chi = {r.chi:.2e}  ({r.status})"
          f"  inverse fidelity {splitter.inverse_splitter_fidelity(S, r.tau):.3f}")

# %% S=6: chi is 2pi periodic and its floor is far above the threshold.
t = np.linspace(0, 2 * np.pi, 10_000)
print("S=6 period residual:", np.abs(splitter.chi(6, t + 2 * np.pi) - splitter.chi(6, t)).max())
print("S=6 best chi:", splitter.find_balance_time(6, (0, 2 * np.pi)).chi)

# %% Even rings keep a rigid phase pattern in R_S (entries are real up to i^-j).
print("S=6 phase pattern holds:", splitter.even_phase_structure_check(6, 1.234).passed)
print("S=5 phase pattern holds:", splitter.even_phase_structure_check(5, 1.234).passed)

# %% How fast does the required time grow?
res = experiments.jt_scaling()
print("tau ~ %.3g * S^%.2f" % (res.fit.coefficient, res.fit.exponent))
print("within a Jt = %g lifetime budget:" % experiments.LIFETIME_BUDGET, res.flags["within_budget"])
