"""A three-path interferometer.

Split, imprint a phase j*phi on site j, then run the splitter for 2 tau to
recombine.  Without interactions the atoms act independently, so the output
fractions follow a simple trigonometric formula for any atom number.
"""
# %%
import numpy as np

from ringsplit import experiments

phis = np.linspace(0, 2 * np.pi, 200)
for N in (1, 5):
    res = experiments.interferometer_sweep(3, N, phis, tau=2 * np.pi / 9)
    dev = np.abs(res.data[:, 1:] - experiments.three_path_populations(phis)).max()
    print(f"N={N}: largest deviation from the closed form {dev:.1e}")

# %% A few landmarks: the output port cycles as phi advances by 2pi/3.
for phi in (0, 2 * np.pi / 3, 4 * np.pi / 3):
    print(f"phi = {phi:.4f}: populations {np.round(experiments.three_path_populations(phi), 12)}")

# %% With interactions the fringes wash out.
for v in (0.0, 0.1, 0.5):
    p = experiments.interferometer(3, 4, v, 2 * np.pi / 9, 0.0)
    print(f"V/J = {v}: N0/N = {p[0]:.4f}")
