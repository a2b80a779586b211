"""Putting numbers on the lattice.

The Bogoliubov gap decides how large a ring can be loaded adiabatically.
A shallow lattice (V0 = 2 E_R) sets the tunneling rate, and intensity
noise on the lattice beams perturbs it only slightly.
"""
# %%
from ringsplit import dynamics

rep = dynamics.adiabaticity_limit(0.85)
print("largest ring with gap/J > 1 at VN/J = 0.85:", rep.limit)
for S in (6, 12, 13):
    print(f"  S={S}: gap/J = {rep.ratios[S]:.3f}")

sp = dynamics.bogoliubov_spectrum(6, 1, 1.0, 0.85)
print("S=6 spectrum:", [round(w, 4) for w in sp.omegas], "gapless k:", sp.gapless_modes())

# %% Tunneling at V0 = 2 E_R for Rb-87 in a 1000 nm lattice.
rate = dynamics.tunneling_rate(2.0)
print(f"hbar J / E_R = {rate:.4f}")
print(f"E_R / h = {dynamics.recoil_energy() / 6.62607015e-34:.1f} Hz")
print(f"J / h = {dynamics.tunneling_frequency(2.0):.1f} Hz")

# %% A 0.1% fluctuation in the exponent.
print("J~/J =", dynamics.intensity_fluctuation(1.0, 0.001))
