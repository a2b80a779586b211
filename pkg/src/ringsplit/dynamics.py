"""Many-body propagation and the physical side models.

Propagation uses the full spectral decomposition H = Q diag(E) Q^+, so
exp(-iHt) costs one matrix-vector pair per time and carries no time-step
error even at Jt ~ 5000.  The Bogoliubov spectrum, the tunneling-rate
approximation and the intensity-noise model are closed-form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .core_model import ConfigurationError, FockBasis, HamiltonianMatrix, ManyBodyState

__all__ = [
    "RB87_MASS",
    "DEFAULT_WAVELENGTH",
    "Propagator",
    "PhononSpectrum",
    "AdiabaticityReport",
    "propagate",
    "bogoliubov_spectrum",
    "adiabaticity_limit",
    "tunneling_rate",
    "recoil_energy",
    "tunneling_frequency",
    "intensity_fluctuation",
]

RB87_MASS = 86.909180527 * constants.atomic_mass  # kg
DEFAULT_WAVELENGTH = 1000e-9  # m


@dataclass(frozen=True, eq=False)
class Propagator:
    """exp(-iHt) for a fixed Hamiltonian, from its eigendecomposition."""

    basis: FockBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_hamiltonian(cls, H: HamiltonianMatrix) -> Propagator:
        m = H.matrix
        # real symmetric input (no offsets with complex phases) takes the cheaper path
        E, Q = np.linalg.eigh(m.real if not np.any(m.imag) else m)
        Q = Q.astype(complex, copy=False)
        E.setflags(write=False)
        Q.setflags(write=False)
        return cls(H.basis, E, Q)

    def reconstruction_error(self, H: HamiltonianMatrix) -> float:
        Q = self.eigenvectors
        return float(np.max(np.abs((Q * self.eigenvalues) @ Q.conj().T - H.matrix)))

    def unitary(self, t: float) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * np.exp(-1j * self.eigenvalues * t)) @ Q.conj().T

    def evolve_vector(self, amplitudes: np.ndarray, t: float) -> np.ndarray:
        Q = self.eigenvectors
        return Q @ (np.exp(-1j * self.eigenvalues * t) * (Q.conj().T @ amplitudes))

    def evolve(self, state: ManyBodyState, t: float) -> ManyBodyState:
        if state.basis != self.basis:
            raise ConfigurationError(f"state lives in {state.basis!r}, propagator in {self.basis!r}")
        return ManyBodyState(self.basis, self.evolve_vector(state.amplitudes, t))


def propagate(state: ManyBodyState, H: HamiltonianMatrix, t: float) -> ManyBodyState:
    """exp(-iHt)|state>.  The decomposition of ``H`` is cached on ``H``."""
    if state.basis != H.basis:
        raise ConfigurationError(f"state lives in {state.basis!r}, Hamiltonian in {H.basis!r}")
    return H.propagator.evolve(state, t)


@dataclass(frozen=True)
class PhononSpectrum:
    S: int
    N: int
    J: float
    V: float
    omegas: tuple[float, ...]

    @property
    def fundamental(self) -> float:
        """omega at the lowest nonzero mode index, k = 1."""
        return self.omegas[1]

    def gapless_modes(self, atol: float = 1e-12) -> tuple[int, ...]:
        return tuple(k for k, w in enumerate(self.omegas) if w <= atol)


def bogoliubov_spectrum(S: int, N: int, J: float = 1.0, V: float = 0.0) -> PhononSpectrum:
    """omega_k = sqrt(4J s_k [4NV/S + 4J s_k]) with s_k = sin^2(2 pi k / S)."""
    if S < 2 or N < 1:
        raise ValueError(f"need S >= 2 and N >= 1, got S={S}, N={N}")
    if not J > 0 or V < 0:
        raise ValueError(f"need J > 0 and V >= 0, got J={J}, V={V}")
    k = np.arange(S)
    s = np.sin(2 * np.pi * k / S) ** 2
    # sin(2 pi k/S) is not exactly zero at k = S/2 in floating point
    s[k * 2 % S == 0] = 0.0
    w = np.sqrt(4 * J * s * (4 * N * V / S + 4 * J * s))
    # omega_k = omega_{S-k} exactly
    w = np.minimum(w, w[(-k) % S])
    return PhononSpectrum(S, N, J, V, tuple(float(x) for x in w))


@dataclass(frozen=True)
class AdiabaticityReport:
    VN_over_J: float
    limit: int | None
    ratios: dict
    min_ratios: dict
    extra_gapless: dict

    def as_dict(self) -> dict:
        return {
            "VN_over_J": self.VN_over_J,
            "limit": self.limit,
            "fundamental_ratio": {str(k): v for k, v in self.ratios.items()},
            "min_nonzero_k_ratio": {str(k): v for k, v in self.min_ratios.items()},
            "extra_gapless_modes": {str(k): list(v) for k, v in self.extra_gapless.items()},
        }


def adiabaticity_limit(VN_over_J: float = 0.85, S_max: int = 20) -> AdiabaticityReport:
    """Largest S in 3..S_max whose lowest phonon mode keeps omega/J > 1.

    The gap is taken at k = 1.  Because omega depends on sin^2(2 pi k/S),
    modes near k = S/2 are soft as well (exactly gapless at k = S/2 for even
    S); they are reported in ``min_ratios`` and ``extra_gapless`` but do not
    enter the limit.
    """
    if S_max < 3:
        raise ValueError("S_max must be at least 3")
    ratios, mins, extra = {}, {}, {}
    for S in range(3, S_max + 1):
        # J = 1, N = 1, V = VN/J: only the product NV enters
        spec = bogoliubov_spectrum(S, 1, 1.0, VN_over_J)
        ratios[S] = spec.fundamental
        mins[S] = min(spec.omegas[1:])
        extra[S] = tuple(k for k in spec.gapless_modes() if k != 0)
    limit = max((S for S, r in ratios.items() if r > 1), default=None)
    return AdiabaticityReport(VN_over_J, limit, ratios, mins, extra)


def tunneling_rate(depth_ratio: float) -> float:
    """hbar J / E_R = (1/2) exp(-(pi^2/4) sqrt(r)) (sqrt(r) + sqrt(r)^3), r = V0/E_R."""
    if not depth_ratio > 0:
        raise ValueError(f"lattice depth ratio must be positive, got {depth_ratio}")
    q = np.sqrt(depth_ratio)
    return float(0.5 * np.exp(-np.pi ** 2 / 4 * q) * (q + q ** 3))


def recoil_energy(mass: float = RB87_MASS, wavelength: float = DEFAULT_WAVELENGTH) -> float:
    """E_R = h^2 / (2 m lambda^2) in joules."""
    return constants.h ** 2 / (2 * mass * wavelength ** 2)


def tunneling_frequency(depth_ratio: float = 2.0, mass: float = RB87_MASS,
                        wavelength: float = DEFAULT_WAVELENGTH) -> float:
    """J in Hz, i.e. hbar J / h for the given lattice depth and species."""
    return tunneling_rate(depth_ratio) * recoil_energy(mass, wavelength) / constants.h


def intensity_fluctuation(J: float, delta: float) -> float:
    """Perturbed rate J exp(-pi^2 delta / (2 sqrt 2)) at V0 = 2 E_R.

    ``delta`` is the fractional change of the exponent; the linearized
    model is only meant for |delta| < 0.1.
    """
    if abs(delta) >= 0.1:
        warnings.warn(f"|delta|={abs(delta)} is outside the small-fluctuation regime",
                      RuntimeWarning, stacklevel=2)
    return float(J * np.exp(-np.pi ** 2 * delta / (2 * np.sqrt(2))))
