"""The three-site splitter.

Lowering the barriers between three ring sites for Jt = 2pi/9 sends a
single atom into an equal superposition of all three sites.  This script
builds the transfer matrix, checks that it is balanced, and runs it three
times in a row to get back to where we started.
"""
# %%
import numpy as np

from ringsplit import splitter

tau = 2 * np.pi / 9
R = splitter.transfer_matrix(3, tau)
np.set_printoptions(precision=4, suppress=True)
print("R_3(2pi/9) =\n", R.matrix)
print("moduli:", np.abs(R.matrix[0]), "-> 1/sqrt(3) =", 1 / np.sqrt(3))
print("chi =", splitter.chi(3, tau))

# %% The closed form: ones on the diagonal, w = exp(2 pi i/3) elsewhere.
w = np.exp(2j * np.pi / 3)
closed = np.array([[1, w, w], [w, 1, w], [w, w, 1]]) / np.sqrt(3)
print("distance up to a global phase:", splitter.global_phase_distance(R.matrix, closed))

# %% Three applications are the identity (up to a phase), so running the
# device for (S-1) tau undoes it.
R3 = np.linalg.matrix_power(R.matrix, 3)
print("R^3 =\n", R3)
print("inverse-splitter fidelity:", splitter.inverse_splitter_fidelity(3, tau))
