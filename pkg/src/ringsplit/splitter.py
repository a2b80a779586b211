"""Single-particle algebra of ring-lattice multiport splitters.

Lowering the barriers of an S-site ring for a dimensionless time Jt and
raising them again maps the site modes through

    R_S(Jt) = U^-1 diag(exp(2i Jt cos(2 pi k / S))) U,
    U_kj = exp(2 pi i jk / S) / sqrt(S).

``R_S`` is circulant, so everything here is evaluated from its first row

    g_c(Jt) = (1/S) sum_k exp(2i Jt cos(2 pi k / S)) exp(2 pi i k c / S),

without any numerical diagonalization.  The matrix is also symmetric
(g_c = g_{S-c}), which is why only floor(S/2)+1 distinct moduli exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "BALANCE_THRESHOLD",
    "REPORTED_BALANCE_TIMES",
    "TransferMatrix",
    "BalanceResult",
    "SingleParticleState",
    "Omega",
    "PhaseCheckReport",
    "mode_transform",
    "first_row",
    "transfer_matrix",
    "omegas",
    "chi",
    "find_balance_time",
    "balance_time",
    "inverse_splitter_fidelity",
    "evolve_single_particle",
    "even_phase_structure_check",
    "adjacent_phase",
    "global_phase_distance",
]

BALANCE_THRESHOLD = 1e-4

# Balance times quoted for the ring sizes studied (units of 1/J).
REPORTED_BALANCE_TIMES = {
    3: 2 * np.pi / 9,
    4: np.pi / 4,
    5: 5.2 * np.pi,
    7: 88 * np.pi,
    9: 177 * np.pi,
}

_CHUNK = 250_000


def mode_transform(S: int) -> np.ndarray:
    """U_kj = exp(2 pi i jk / S) / sqrt(S), the momentum-mode transform."""
    if S < 2:
        raise ValueError(f"need at least 2 sites, got S={S}")
    k = np.arange(S)
    return np.exp(2j * np.pi * np.outer(k, k) / S) / np.sqrt(S)


def _dispersion(S: int) -> np.ndarray:
    return np.cos(2 * np.pi * np.arange(S) / S)


def first_row(S: int, Jt) -> np.ndarray:
    """First row of R_S for a scalar or 1-D array of times.

    Returns shape (S,) for scalar input and (len(Jt), S) otherwise.
    """
    t = np.asarray(Jt, dtype=float)
    k = np.arange(S)
    fourier = np.exp(2j * np.pi * np.outer(k, k) / S) / S
    phases = np.exp(2j * np.multiply.outer(t, _dispersion(S)))
    return phases @ fourier


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    S: int
    Jt: float
    matrix: np.ndarray

    @property
    def first_row(self) -> np.ndarray:
        return self.matrix[0]

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            if other.S != self.S:
                raise ValueError("transfer matrices of different sizes")
            return TransferMatrix(self.S, self.Jt + other.Jt, self.matrix @ other.matrix)
        return self.matrix @ other

    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(self.S))))


def _circulant(row: np.ndarray) -> np.ndarray:
    S = row.shape[-1]
    r = np.arange(S)
    return row[(r[None, :] - r[:, None]) % S]


def transfer_matrix(S: int, Jt: float) -> TransferMatrix:
    """Closed-form R_S(Jt); entry (r, c) is g_{(c-r) mod S}."""
    if S < 2:
        raise ValueError(f"need at least 2 sites, got S={S}")
    m = _circulant(first_row(S, float(Jt)))
    m.setflags(write=False)
    return TransferMatrix(S, float(Jt), m)


class Omega(NamedTuple):
    offset: int
    modulus: float
    multiplicity: int


def omegas(S: int, Jt: float) -> list[Omega]:
    """Moduli of the first-row entries grouped by the c <-> S-c symmetry.

    There are (S+1)/2 classes for odd S and (S+2)/2 for even S.
    """
    row = np.abs(first_row(S, float(Jt)))
    out = []
    for c in range(S // 2 + 1):
        mult = 1 if c == 0 or 2 * c == S else 2
        out.append(Omega(c, float(row[c]), mult))
    return out


def chi(S: int, Jt):
    """Balance metric sum_c (|R_S[0, c]| - 1/sqrt(S))**2.

    The moduli are those of the normalized matrix entries (the displayed
    Omega values divided by S); a balanced splitter has every entry of
    modulus 1/sqrt(S).  The sum runs over all S entries, degenerate ones
    included.  Vectorized over ``Jt``.
    """
    t = np.asarray(Jt, dtype=float)
    if t.ndim == 0:
        r = np.abs(first_row(S, t))
        return float(np.sum((r - 1 / np.sqrt(S)) ** 2))
    out = np.empty(t.shape)
    flat = t.ravel()
    res = out.reshape(-1)
    for i in range(0, flat.size, _CHUNK):
        r = np.abs(first_row(S, flat[i:i + _CHUNK]))
        res[i:i + _CHUNK] = np.sum((r - 1 / np.sqrt(S)) ** 2, axis=1)
    return out


@dataclass(frozen=True)
class BalanceResult:
    S: int
    tau: float
    chi: float
    omega_moduli: tuple[float, ...]
    search_window: tuple[float, float]
    threshold: float
    status: str
    grid_step: float = 1e-3
    candidates: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def balanced(self) -> bool:
        return self.status == "balanced"

    def as_dict(self) -> dict:
        return {
            "S": self.S,
            "tau": self.tau,
            "tau_over_pi": self.tau / np.pi,
            "chi": self.chi,
            "status": self.status,
            "threshold": self.threshold,
            "search_window": list(self.search_window),
            "grid_step": self.grid_step,
            "omega_moduli": list(self.omega_moduli),
        }


def _refine(S: int, a: float, b: float, xtol: float) -> tuple[float, float]:
    res = minimize_scalar(lambda t: chi(S, t), bounds=(a, b), method="bounded",
                          options={"xatol": xtol, "maxiter": 500})
    return float(res.x), float(res.fun)


def find_balance_time(S: int, window: tuple[float, float] = (0.0, 5000.0),
                      threshold: float = BALANCE_THRESHOLD, step: float = 1e-3,
                      xtol: float = 1e-9) -> BalanceResult:
    """Smallest Jt in ``window`` at which R_S is balanced to ``threshold``.

    chi is scanned on a uniform grid of spacing ``step``.  Every grid-local
    minimum that could plausibly dip under the threshold is refined with a
    bounded Brent search between its grid neighbours, in time order; the
    first refined minimum with chi <= threshold is returned as "balanced".
    Otherwise the deepest refined minimum is returned as "unbalanced".
    """
    lo, hi = map(float, window)
    if not hi > lo:
        raise ValueError(f"empty search window {window!r}")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if step > 1e-3:
        raise ValueError("grid step must be at most 1e-3")

    n = int(np.floor((hi - lo) / step)) + 1
    grid = lo + step * np.arange(n)
    grid[-1] = min(grid[-1], hi)
    values = chi(S, grid)

    interior = np.zeros(n, dtype=bool)
    interior[1:-1] = (values[1:-1] <= values[:-2]) & (values[1:-1] <= values[2:])
    # window edges count as minima when chi is still falling there
    if n > 1:
        interior[0] = values[0] < values[1]
        interior[-1] = values[-1] < values[-2]
    minima = np.nonzero(interior)[0]

    # refine anything within a factor 4 of the threshold, plus the global
    # grid minimum so the unbalanced fallback is refined too
    screen = minima[values[minima] <= 4 * threshold]
    best_grid = int(np.argmin(values))
    candidates = []
    found = None
    for i in sorted(set(screen.tolist()) | {best_grid}):
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, n - 1)]
        t, c = _refine(S, a, b, xtol) if b > a else (grid[i], values[i])
        if values[i] < c:
            t, c = float(grid[i]), float(values[i])
        candidates.append((t, c))
        if found is None and c <= threshold:
            found = (t, c)
    if found is not None:
        status = "balanced"
        tau, best = found
    else:
        status = "unbalanced"
        tau, best = min(candidates, key=lambda tc: (tc[1], tc[0]))
    moduli = tuple(float(x) for x in np.abs(first_row(S, tau)))
    return BalanceResult(S, tau, best, moduli, (lo, hi), threshold, status, step,
                         tuple(candidates))


def balance_time(S: int, threshold: float = BALANCE_THRESHOLD) -> BalanceResult:
    """Balance time at the operating point used throughout the experiments.

    For ring sizes with a reported balance time the search is restricted to
    a +/-1% window around it, which lands on the chi minimum the reported
    value rounds; other sizes search the default window.
    """
    if S in REPORTED_BALANCE_TIMES:
        t0 = REPORTED_BALANCE_TIMES[S]
        return find_balance_time(S, (0.99 * t0, 1.01 * t0), threshold)
    return find_balance_time(S, threshold=threshold)


def inverse_splitter_fidelity(S: int, tau: float) -> float:
    """Mean return probability (1/S) sum_j |(R_S(tau)^S)_jj|^2.

    R_S(tau)^S = R_S(S tau) by the group property of the closed form.
    """
    m = transfer_matrix(S, S * tau).matrix
    return float(np.mean(np.abs(np.diag(m)) ** 2))


@dataclass(frozen=True, eq=False)
class SingleParticleState:
    S: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (self.S,):
            raise ValueError(f"expected {self.S} amplitudes, got shape {a.shape}")
        if abs(np.linalg.norm(a) - 1) > 1e-12:
            raise ValueError("single-particle state is not normalized")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def at_site(cls, S: int, j: int = 0) -> SingleParticleState:
        a = np.zeros(S, dtype=complex)
        a[j % S] = 1
        return cls(S, a)

    @property
    def momentum_amplitudes(self) -> np.ndarray:
        """Amplitudes B_k on the momentum modes alpha_k; B = U A."""
        return mode_transform(self.S) @ self.amplitudes

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def evolve_single_particle(state: SingleParticleState, Jt: float) -> SingleParticleState:
    a = transfer_matrix(state.S, Jt).matrix @ state.amplitudes
    return SingleParticleState(state.S, a)


@dataclass(frozen=True)
class PhaseCheckReport:
    passed: bool
    residuals: tuple[float, ...]
    checked_sites: tuple[int, ...]


def _wrap_mod_pi(x):
    return (np.asarray(x) + np.pi / 2) % np.pi - np.pi / 2


def even_phase_structure_check(S: int, Jt: float, tol: float = 1e-9) -> PhaseCheckReport:
    """Check that a particle started at site 0 has arg(A_j) = pi j / 2 mod pi.

    One global phase is removed first, taken from site 0 (or from the
    largest amplitude if site 0 is empty).  Sites with |A_j| <= 1e-9 are
    skipped.  Odd S is accepted and will normally fail.
    """
    a = evolve_single_particle(SingleParticleState.at_site(S, 0), Jt).amplitudes
    ref = 0 if abs(a[0]) > 1e-9 else int(np.argmax(np.abs(a)))
    a = a * np.exp(-1j * (np.angle(a[ref]) - np.pi * ref / 2))
    sites = np.nonzero(np.abs(a) > 1e-9)[0]
    res = _wrap_mod_pi(np.angle(a[sites]) - np.pi * sites / 2)
    residuals = tuple(float(r) for r in res)
    passed = bool(np.all(np.abs(res) <= tol))
    return PhaseCheckReport(passed, residuals, tuple(int(j) for j in sites))


def adjacent_phase(S: int, Jt, j: int = 0) -> np.ndarray:
    """arg(A_{j+1} / A_j) for a particle started at site 0."""
    rows = np.atleast_2d(first_row(S, Jt))
    # R is symmetric, so column 0 equals row 0
    return np.angle(rows[:, (j + 1) % S] / rows[:, j % S])


def global_phase_distance(a, b) -> float:
    """max |a - e^{i theta} b| with theta chosen to align b with a.

    theta is the phase of <b, a>, the least-squares optimum; at a balanced
    point every entry has the same modulus, so picking a single reference
    entry would be arbitrary.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    theta = np.angle(np.vdot(b, a))
    return float(np.max(np.abs(a - np.exp(1j * theta) * b)))
