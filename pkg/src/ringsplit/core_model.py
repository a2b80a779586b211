"""Fock-space model of N bosons on an S-site ring lattice.

The full Hamiltonian is

    H = sum_j eps_j n_j - J sum_j (a_j^+ a_{j+1} + h.c.) + V sum_j a_j^+2 a_j^2

with periodic site indices (site S is site 0).  Each term has its own
builder so callers can assemble exactly the pieces they need; the terms add
together with ``+``.

All matrices are dense.  The largest configurations used here (S=3, N=40
and S=9, N=5) have dimension 861 and 1287, which dense LAPACK handles
comfortably.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_BASIS_DIM",
    "ConfigurationError",
    "BasisSizeError",
    "ImpossibleLossError",
    "RingSpec",
    "FockBasis",
    "ManyBodyState",
    "HamiltonianMatrix",
    "build_basis",
    "hopping_hamiltonian",
    "interaction_hamiltonian",
    "offset_hamiltonian",
    "ring_hamiltonian",
    "phase_imprint",
    "annihilate_at_site",
    "site_populations",
]

# Dense complex storage of an 8000 x 8000 matrix is ~1 GB and a full
# Hermitian eigendecomposition takes minutes; beyond that we refuse.
MAX_BASIS_DIM = 8000


class ConfigurationError(ValueError):
    """Inconsistent model configuration (wrong lengths, mismatched bases)."""


class BasisSizeError(ConfigurationError):
    """The requested Fock space is too large for dense storage."""

    def __init__(self, S: int, N: int, dim: int):
        self.S, self.N, self.dim = S, N, dim
        super().__init__(
            f"Fock space for S={S}, N={N} has dimension {dim} "
            f"> MAX_BASIS_DIM={MAX_BASIS_DIM}"
        )


class ImpossibleLossError(ValueError):
    """Annihilating at a site that carries no amplitude."""


@dataclass(frozen=True)
class RingSpec:
    """Physical configuration of a ring lattice."""

    S: int
    N: int
    J: float = 1.0
    V: float = 0.0
    epsilon: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.S < 2:
            raise ConfigurationError(f"need at least 2 sites, got S={self.S}")
        if self.N < 1:
            raise ConfigurationError(f"need at least 1 atom, got N={self.N}")
        if not self.J > 0:
            raise ConfigurationError(f"tunneling rate must be positive, got J={self.J}")
        eps = (0.0,) * self.S if self.epsilon is None else tuple(float(e) for e in self.epsilon)
        if len(eps) != self.S:
            raise ConfigurationError(f"epsilon has {len(eps)} entries, expected {self.S}")
        object.__setattr__(self, "epsilon", eps)

    def site(self, j: int) -> int:
        return j % self.S

    def basis(self) -> FockBasis:
        return build_basis(self.S, self.N)

    def hamiltonian(self, basis: FockBasis | None = None) -> HamiltonianMatrix:
        basis = self.basis() if basis is None else basis
        return ring_hamiltonian(basis, self.J, self.V, self.epsilon)


def _occupations(S: int, N: int) -> np.ndarray:
    # Reverse-lexicographic: (N,0,...,0) first, (0,...,0,N) last.
    if S == 1:
        return np.array([[N]], dtype=np.int64)
    blocks = []
    for n0 in range(N, -1, -1):
        rest = _occupations(S - 1, N - n0)
        head = np.full((rest.shape[0], 1), n0, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


class FockBasis:
    """Occupation-number basis for N bosons on S sites at fixed total N.

    States are stored as rows of an integer array in reverse-lexicographic
    order, so ``states[0]`` is ``(N, 0, ..., 0)``.  Lookup of an occupation
    vector goes through an integer code (digits base N+1) and a binary
    search, which also vectorizes over many vectors at once.
    """

    def __init__(self, S: int, N: int):
        if S < 2:
            raise ConfigurationError(f"need at least 2 sites, got S={S}")
        if N < 0:
            raise ConfigurationError(f"atom number must be non-negative, got N={N}")
        dim = comb(N + S - 1, S - 1)
        if dim > MAX_BASIS_DIM:
            raise BasisSizeError(S, N, dim)
        self.S = S
        self.N = N
        self.states = _occupations(S, N)
        self.states.setflags(write=False)
        self._weights = (N + 1) ** np.arange(S - 1, -1, -1, dtype=np.int64)
        codes = self.states @ self._weights
        # reverse-lex order makes codes strictly decreasing
        self._order = np.argsort(codes)
        self._sorted_codes = codes[self._order]

    @property
    def dim(self) -> int:
        return self.states.shape[0]

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"FockBasis(S={self.S}, N={self.N}, dim={self.dim})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FockBasis) and (self.S, self.N) == (other.S, other.N)

    def __hash__(self) -> int:
        return hash((FockBasis, self.S, self.N))

    def lookup(self, occupations) -> int | np.ndarray:
        """Index of one occupation vector, or an index array for a 2-D stack."""
        occ = np.asarray(occupations, dtype=np.int64)
        single = occ.ndim == 1
        occ = np.atleast_2d(occ)
        if occ.shape[1] != self.S or np.any(occ < 0) or np.any(occ.sum(axis=1) != self.N):
            raise KeyError(f"not a state of {self!r}: {occupations!r}")
        codes = occ @ self._weights
        pos = np.searchsorted(self._sorted_codes, codes)
        idx = self._order[pos]
        return int(idx[0]) if single else idx

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(n) for n in row): i for i, row in enumerate(self.states)}


def build_basis(S: int, N: int) -> FockBasis:
    if N < 1:
        raise ConfigurationError(f"need at least 1 atom, got N={N}")
    return FockBasis(S, N)


@dataclass(frozen=True, eq=False)
class ManyBodyState:
    """Normalized amplitude vector over a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ConfigurationError(
                f"amplitude vector has shape {amps.shape}, basis dimension is {self.basis.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, basis: FockBasis, occupations: Sequence[int]) -> ManyBodyState:
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.lookup(occupations)] = 1.0
        return cls(basis, amps)

    @classmethod
    def from_vector(cls, basis: FockBasis, vector) -> ManyBodyState:
        """Normalize ``vector`` and wrap it."""
        v = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, v / norm)

    def overlap(self, other: ManyBodyState) -> complex:
        if other.basis != self.basis:
            raise ConfigurationError("overlap between states in different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: ManyBodyState) -> float:
        return abs(self.overlap(other)) ** 2

    def populations(self) -> np.ndarray:
        """Mean occupation of every site."""
        return site_populations(self)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense Hermitian matrix over a Fock basis plus the terms it contains."""

    basis: FockBasis
    matrix: np.ndarray
    terms: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ConfigurationError(f"matrix shape {m.shape} does not match {self.basis!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "terms", frozenset(self.terms))

    def __add__(self, other: HamiltonianMatrix) -> HamiltonianMatrix:
        if not isinstance(other, HamiltonianMatrix):
            return NotImplemented
        if other.basis != self.basis:
            raise ConfigurationError("cannot add Hamiltonians over different bases")
        return HamiltonianMatrix(self.basis, self.matrix + other.matrix, self.terms | other.terms)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0))

    def expectation(self, state: ManyBodyState) -> float:
        a = state.amplitudes
        return float(np.vdot(a, self.matrix @ a).real)

    @cached_property
    def propagator(self):
        """Spectral decomposition, computed once per matrix."""
        from .dynamics import Propagator

        return Propagator.from_hamiltonian(self)


def hopping_hamiltonian(basis: FockBasis, J: float = 1.0) -> HamiltonianMatrix:
    """-J sum_j (a_j^+ a_{j+1} + a_{j+1}^+ a_j) with periodic wrap.

    For S=2 the bonds j=0 and j=1 join the same pair of sites, so that pair
    is coupled twice.
    """
    S, dim = basis.S, basis.dim
    H = np.zeros((dim, dim), dtype=complex)
    states = basis.states
    cols = np.arange(dim)
    for j in range(S):
        k = (j + 1) % S
        # a_j^+ a_k then a_k^+ a_j
        for src, dst in ((k, j), (j, k)):
            mask = states[:, src] > 0
            if not np.any(mask):
                continue
            new = states[mask].copy()
            amp = np.sqrt(new[:, src] * (new[:, dst] + 1.0))
            new[:, src] -= 1
            new[:, dst] += 1
            rows = basis.lookup(new)
            np.add.at(H, (rows, cols[mask]), -J * amp)
    return HamiltonianMatrix(basis, H, {"hopping"})


def interaction_hamiltonian(basis: FockBasis, V: float) -> HamiltonianMatrix:
    """V sum_j a_j^+2 a_j^2, diagonal with entries V sum_j n_j (n_j - 1)."""
    n = basis.states
    diag = V * np.sum(n * (n - 1), axis=1).astype(float)
    return HamiltonianMatrix(basis, np.diag(diag).astype(complex), {"interaction"})


def offset_hamiltonian(basis: FockBasis, epsilon: Sequence[float]) -> HamiltonianMatrix:
    eps = np.asarray(epsilon, dtype=float)
    if eps.shape != (basis.S,):
        raise ConfigurationError(f"epsilon has {eps.size} entries, expected {basis.S}")
    diag = basis.states @ eps
    return HamiltonianMatrix(basis, np.diag(diag).astype(complex), {"offsets"})


def ring_hamiltonian(basis: FockBasis, J: float = 1.0, V: float = 0.0,
                     epsilon: Sequence[float] | None = None) -> HamiltonianMatrix:
    """Hopping plus interaction, plus offsets when any are given."""
    H = hopping_hamiltonian(basis, J) + interaction_hamiltonian(basis, V)
    if epsilon is not None:
        H = H + offset_hamiltonian(basis, epsilon)
    return H


def phase_imprint(state: ManyBodyState, phases: Sequence[float]) -> ManyBodyState:
    """Multiply each Fock amplitude by exp(i sum_j n_j phi_j)."""
    phi = np.asarray(phases, dtype=float)
    if phi.shape != (state.basis.S,):
        raise ConfigurationError(f"got {phi.size} phases for {state.basis.S} sites")
    factor = np.exp(1j * (state.basis.states @ phi))
    return ManyBodyState(state.basis, state.amplitudes * factor)


def annihilate_at_site(state: ManyBodyState, j: int) -> tuple[ManyBodyState, float]:
    """Apply a_j and renormalize.

    Returns the (N-1)-particle state together with <psi|n_j|psi>, the squared
    norm of a_j|psi> before renormalization.
    """
    basis = state.basis
    if basis.N < 1:
        raise ConfigurationError("no particles to remove")
    j = j % basis.S
    target = FockBasis(basis.S, basis.N - 1)
    occ = basis.states
    mask = occ[:, j] > 0
    out = np.zeros(target.dim, dtype=complex)
    if np.any(mask):
        lowered = occ[mask].copy()
        lowered[:, j] -= 1
        np.add.at(out, target.lookup(lowered), np.sqrt(occ[mask, j]) * state.amplitudes[mask])
    weight = float(np.vdot(out, out).real)
    if weight <= 1e-300:
        raise ImpossibleLossError(f"site {j} is never occupied; a particle cannot be lost there")
    return ManyBodyState(target, out / np.sqrt(weight)), weight


def site_populations(state: ManyBodyState) -> np.ndarray:
    probs = np.abs(state.amplitudes) ** 2
    return probs @ state.basis.states
