"""Experiment pipelines built on the splitter and many-body propagation.

Every pipeline starts from Fock states, uses J = 1 (so times are Jt and
interaction strengths are V/J), and idealizes barrier lowering/raising as
instantaneous.  Scans return :class:`ExperimentResult` records which the
command-line layer serializes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .core_model import (
    FockBasis,
    HamiltonianMatrix,
    ManyBodyState,
    annihilate_at_site,
    build_basis,
    hopping_hamiltonian,
    interaction_hamiltonian,
    phase_imprint,
    site_populations,
)
from .dynamics import propagate
from .splitter import balance_time

__all__ = [
    "FitResult",
    "ExperimentResult",
    "CriticalValue",
    "LossResult",
    "splitter_hamiltonian",
    "run_splitter",
    "interferometer",
    "interferometer_sweep",
    "three_path_populations",
    "interaction_fidelity",
    "interaction_fidelity_scan",
    "critical_interaction",
    "interaction_scaling",
    "interaction_limit_vs_sites",
    "timing_fidelity",
    "timing_error_scan",
    "critical_timing_error",
    "timing_scaling",
    "loss_experiment",
    "jt_scaling",
    "power_law_fit",
    "LIFETIME_BUDGET",
]

# Largest Jt compatible with typical condensate lifetimes.
LIFETIME_BUDGET = 800.0


@dataclass(frozen=True)
class FitResult:
    """y = coefficient * x**exponent, fitted in log-log space."""

    coefficient: float
    exponent: float
    rms_log_residual: float

    def __call__(self, x):
        return self.coefficient * np.asarray(x, dtype=float) ** self.exponent

    def as_dict(self) -> dict:
        return {"coefficient": self.coefficient, "exponent": self.exponent,
                "rms_log_residual": self.rms_log_residual}


def power_law_fit(x: Sequence[float], y: Sequence[float] | None = None) -> FitResult:
    """Least-squares line through (ln x, ln y).

    Accepts either two sequences or a single sequence of (x, y) pairs.
    """
    if y is None:
        pts = np.asarray(x, dtype=float)
        if pts.ndim != 2 or pts.shape[-1] != 2:
            raise ValueError("expected a sequence of (x, y) pairs")
        x, y = pts[:, 0], pts[:, 1]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D and of equal length")
    if x.size < 2:
        raise ValueError("a power-law fit needs at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit requires strictly positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("all x values coincide")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    return FitResult(float(np.exp(intercept)), float(slope), float(np.sqrt(np.mean(resid ** 2))))


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """A named table of results plus the parameters that produced it."""

    kind: str
    parameters: dict
    columns: tuple[str, ...]
    data: np.ndarray
    fit: FitResult | None = None
    flags: dict = field(default_factory=dict)
    units: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=float).reshape(-1, len(self.columns))
        d.setflags(write=False)
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def x(self) -> np.ndarray:
        return self.data[:, 0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def series(self) -> list[tuple[float, ...]]:
        return [tuple(float(v) for v in row) for row in self.data]


@dataclass(frozen=True)
class CriticalValue:
    """Location of the first downward crossing of a fidelity target."""

    value: float | None
    target: float
    status: str
    non_monotonic: bool = False
    evaluations: int = 0

    @property
    def found(self) -> bool:
        return self.status == "crossed"


@dataclass(frozen=True)
class LossResult:
    fidelity: float
    loss_weight: float
    loss_site: int


def _ordered_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=32)
def _hopping(S: int, N: int) -> HamiltonianMatrix:
    return hopping_hamiltonian(build_basis(S, N), 1.0)


@lru_cache(maxsize=64)
def splitter_hamiltonian(S: int, N: int, V_over_J: float = 0.0) -> HamiltonianMatrix:
    """Hopping (J = 1) plus on-site interaction V/J; cached per parameters."""
    hop = _hopping(S, N)
    if V_over_J == 0:
        return hop
    return hop + interaction_hamiltonian(hop.basis, V_over_J)


def _fock_input(basis: FockBasis, occupation: Sequence[int] | None) -> ManyBodyState:
    if occupation is None:
        occupation = (basis.N,) + (0,) * (basis.S - 1)
    occupation = tuple(int(n) for n in occupation)
    if len(occupation) != basis.S or sum(occupation) != basis.N:
        raise ValueError(f"input {occupation} is not an occupation of {basis.N} atoms on {basis.S} sites")
    return ManyBodyState.fock(basis, occupation)


def run_splitter(S: int, N: int, V_over_J: float, Jt: float,
                 occupation: Sequence[int] | ManyBodyState | None = None) -> ManyBodyState:
    """Lower barriers, evolve for Jt, raise barriers; starts from |N,0,...,0> by default."""
    H = splitter_hamiltonian(S, N, float(V_over_J))
    if isinstance(occupation, ManyBodyState):
        state = occupation
    else:
        state = _fock_input(H.basis, occupation)
    return propagate(state, H, Jt)


def interferometer(S: int, N: int, V_over_J: float, tau: float, phi: float,
                   occupation: Sequence[int] | None = None) -> np.ndarray:
    """Splitter, linear phase ramp phi_j = j phi, inverse splitter.

    The inverse splitter is the same device run for (S-1) tau.  Returns
    the mean occupation of every site divided by N.
    """
    state = run_splitter(S, N, V_over_J, tau, occupation)
    state = phase_imprint(state, phi * np.arange(S))
    state = run_splitter(S, N, V_over_J, (S - 1) * tau, state)
    return site_populations(state) / N


def interferometer_sweep(S: int, N: int, phis: Sequence[float], tau: float | None = None,
                         V_over_J: float = 0.0, occupation: Sequence[int] | None = None,
                         workers: int = 1) -> ExperimentResult:
    if tau is None:
        tau = balance_time(S).tau
    phis = np.asarray(phis, dtype=float)
    rows = _ordered_map(lambda p: interferometer(S, N, V_over_J, tau, p, occupation), phis, workers)
    data = np.column_stack([phis, np.asarray(rows).reshape(len(phis), S)])
    cols = ("phi",) + tuple(f"N{j}" for j in range(S))
    return ExperimentResult("interferometer", {"S": S, "N": N, "V_over_J": V_over_J, "tau": tau},
                            cols, data, units={"phi": "rad", **{c: "fraction of N" for c in cols[1:]}})


def three_path_populations(phi) -> np.ndarray:
    """Closed-form output fractions of the three-site interferometer.

    Vectorized: returns shape (3,) for scalar phi, (len(phi), 3) otherwise.
    """
    p = np.asarray(phi, dtype=float)
    third = 2 * np.pi / 3
    out = np.stack([
        3 + 4 * np.cos(p) + 2 * np.cos(2 * p),
        3 + 4 * np.cos(p - third) + 2 * np.cos(2 * p + third),
        3 + 4 * np.cos(p + third) + 2 * np.cos(2 * p - third),
    ], axis=-1)
    return out / 9


def _pipeline(S: int, N: int, V_over_J: float, tau: float) -> ManyBodyState:
    state = run_splitter(S, N, V_over_J, tau)
    return run_splitter(S, N, V_over_J, (S - 1) * tau, state)


def interaction_fidelity(S: int, N: int, VN_over_J: float, tau: float) -> float:
    """|<psi_0|psi_V>|^2 for splitter + inverse splitter on |N,0,...,0>.

    V = (VN/J)/N is active during both evolutions; psi_0 is the same
    pipeline without interactions.
    """
    ref = _pipeline(S, N, 0.0, tau)
    out = _pipeline(S, N, VN_over_J / N, tau)
    return ref.fidelity(out)


def interaction_fidelity_scan(S: int, N: int, grid: Sequence[float], tau: float | None = None,
                              workers: int = 1) -> ExperimentResult:
    if tau is None:
        tau = balance_time(S).tau
    grid = np.asarray(grid, dtype=float)
    F = _ordered_map(lambda x: interaction_fidelity(S, N, x, tau), grid, workers)
    return ExperimentResult("scan-interactions", {"S": S, "N": N, "tau": tau},
                            ("VN_over_J", "fidelity"), np.column_stack([grid, F]),
                            units={"VN_over_J": "dimensionless", "fidelity": "dimensionless"})


def _first_crossing(f: Callable[[float], float], target: float, start: float, stop: float,
                    factor: float, rtol: float, atol: float) -> CriticalValue:
    """First x where f drops below ``target``, scanning geometrically upward."""
    prev_x, prev_f = 0.0, f(0.0)
    evals = 1
    history = [prev_f]
    x = start
    while x <= stop:
        fx = f(x)
        evals += 1
        history.append(fx)
        if fx < target:
            break
        prev_x, prev_f = x, fx
        x *= factor
    else:
        return CriticalValue(None, target, "above target everywhere", _non_monotonic(history), evals)
    lo, hi = prev_x, x
    while hi - lo > min(atol, rtol * hi):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        evals += 1
        if fm < target:
            hi = mid
        else:
            lo = mid
    return CriticalValue(0.5 * (lo + hi), target, "crossed", _non_monotonic(history), evals)


def _non_monotonic(values: Sequence[float]) -> bool:
    return bool(np.any(np.diff(values) > 1e-12))


def critical_interaction(S: int, N: int, F_target: float = 0.95, tau: float | None = None,
                         start: float = 1e-6, stop: float = 10.0, factor: float = 2.0,
                         tol: float = 1e-4) -> CriticalValue:
    """VN/J at the first downward crossing of ``F_target``.

    A geometric scan start, start*factor, ... brackets the crossing, then
    bisection narrows the bracket to ``tol`` (absolute, and relative to the
    bracket when the value itself is small).
    """
    if tau is None:
        tau = balance_time(S).tau
    f = lambda x: interaction_fidelity(S, N, x, tau)  # noqa: E731
    return _first_crossing(f, F_target, start, stop, factor, rtol=tol, atol=tol)


def interaction_scaling(S: int = 3, Ns: Sequence[int] = tuple(range(2, 41, 2)),
                        F_target: float = 0.95, tau: float | None = None,
                        workers: int = 1) -> ExperimentResult:
    """Critical VN/J versus N with a power-law fit."""
    if tau is None:
        tau = balance_time(S).tau
    crit = _ordered_map(lambda n: critical_interaction(S, n, F_target, tau), Ns, workers)
    vals = np.array([c.value if c.found else np.nan for c in crit])
    ok = np.isfinite(vals)
    fit = power_law_fit(np.asarray(Ns, dtype=float)[ok], vals[ok]) if ok.sum() >= 2 else None
    return ExperimentResult("scan-interactions-critical",
                            {"S": S, "F_target": F_target, "tau": tau},
                            ("N", "VN_over_J_critical"), np.column_stack([Ns, vals]), fit,
                            flags={"non_monotonic_N": [int(n) for n, c in zip(Ns, crit) if c.non_monotonic]})


def interaction_limit_vs_sites(sites: Sequence[int] = (3, 4, 5, 7, 9), N: int = 5,
                               F_target: float = 0.95, workers: int = 1) -> ExperimentResult:
    """Critical V/J (not VN/J) at fixed N for several ring sizes."""
    taus = [balance_time(S).tau for S in sites]
    crit = _ordered_map(lambda st: critical_interaction(st[0], N, F_target, st[1]),
                        list(zip(sites, taus)), workers)
    vn = np.array([c.value if c.found else np.nan for c in crit])
    return ExperimentResult("interaction-limit", {"N": N, "F_target": F_target},
                            ("S", "tau", "VN_over_J_critical", "V_over_J_critical"),
                            np.column_stack([sites, taus, vn, vn / N]))


def timing_fidelity(S: int, N: int, tau: float, eps: float) -> float:
    """|<psi(tau)|psi(tau + eps)>|^2 for a single splitter at V = 0."""
    a = run_splitter(S, N, 0.0, tau)
    b = run_splitter(S, N, 0.0, tau + eps)
    return a.fidelity(b)


def timing_error_scan(S: int, N: int, eps_grid: Sequence[float], tau: float | None = None,
                      workers: int = 1) -> ExperimentResult:
    if tau is None:
        tau = balance_time(S).tau
    eps = np.asarray(eps_grid, dtype=float)
    F = _ordered_map(lambda e: timing_fidelity(S, N, tau, e), eps, workers)
    crit = critical_timing_error(S, N, tau=tau)
    params = {"S": S, "N": N, "tau": tau,
              "eps_critical": crit.value,
              "fractional_eps_critical": crit.value / tau if crit.found else None}
    return ExperimentResult("scan-timing", params, ("eps", "eps_over_tau", "fidelity"),
                            np.column_stack([eps, eps / tau, F]),
                            units={"eps": "Jt", "eps_over_tau": "dimensionless",
                                   "fidelity": "dimensionless"})


def critical_timing_error(S: int, N: int, F_target: float = 0.95, tau: float | None = None,
                          tol: float = 1e-7) -> CriticalValue:
    if tau is None:
        tau = balance_time(S).tau
    f = lambda e: timing_fidelity(S, N, tau, e)  # noqa: E731
    return _first_crossing(f, F_target, 1e-3, 10.0, 1.5, rtol=tol, atol=tol)


def timing_scaling(S: int = 3, Ns: Sequence[int] = tuple(range(2, 41, 2)),
                   F_target: float = 0.95, tau: float | None = None) -> ExperimentResult:
    """Critical timing error versus N with a power-law fit."""
    if tau is None:
        tau = balance_time(S).tau
    vals = np.array([critical_timing_error(S, n, F_target, tau).value for n in Ns])
    fit = power_law_fit(np.asarray(Ns, dtype=float), vals)
    return ExperimentResult("timing-critical", {"S": S, "F_target": F_target, "tau": tau},
                            ("N", "eps_critical"), np.column_stack([Ns, vals]), fit)


def loss_experiment(S: int, N: int, V_over_J: float, tau: float, loss_site: int = 0) -> LossResult:
    """Fidelity between 'N atoms, one lost at tau/2' and 'N-1 atoms, none lost'."""
    if N < 2:
        raise ValueError("the loss experiment needs at least two atoms")
    half = run_splitter(S, N, V_over_J, tau / 2)
    reduced, weight = annihilate_at_site(half, loss_site)
    a = run_splitter(S, N - 1, V_over_J, tau / 2, reduced)
    b = run_splitter(S, N - 1, V_over_J, tau)
    return LossResult(a.fidelity(b), weight, loss_site % S)


def jt_scaling(sites: Sequence[int] = (3, 4, 5, 7, 9), taus: Sequence[float] | None = None) -> ExperimentResult:
    """Balance time versus ring size with a power-law fit."""
    if taus is None:
        results = [balance_time(S) for S in sites]
        taus = [r.tau for r in results]
        chis = [r.chi for r in results]
    else:
        chis = [np.nan] * len(sites)
    fit = power_law_fit(np.asarray(sites, dtype=float), np.asarray(taus, dtype=float))
    return ExperimentResult("scaling", {"sites": list(sites), "lifetime_budget": LIFETIME_BUDGET},
                            ("S", "tau", "chi"), np.column_stack([sites, taus, chis]), fit,
                            flags={"within_budget": bool(max(taus) <= LIFETIME_BUDGET)})
