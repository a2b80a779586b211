import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from ringsplit.core_model import build_basis, hopping_hamiltonian
from ringsplit.splitter import (
    SingleParticleState,
    adjacent_phase,
    chi,
    even_phase_structure_check,
    evolve_single_particle,
    find_balance_time,
    first_row,
    global_phase_distance,
    inverse_splitter_fidelity,
    mode_transform,
    omegas,
    transfer_matrix,
)

TRITTER_TIME = 2 * np.pi / 9


def expm_oracle(S, Jt):
    """exp(-i h t) for the single-particle ring matrix h, by Pade expm."""
    h = hopping_hamiltonian(build_basis(S, 1), 1.0).matrix
    return expm(-1j * h * Jt)


class TestModeTransform:
    def test_two_sites(self):
        np.testing.assert_allclose(mode_transform(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2), atol=1e-15)

    def test_three_sites(self):
        w = np.exp(2j * np.pi / 3)
        U3 = np.array([[1, 1, 1], [1, w, w.conjugate()], [1, w.conjugate(), w]]) / np.sqrt(3)
        np.testing.assert_allclose(mode_transform(3), U3, atol=1e-15)

    @pytest.mark.parametrize("S", range(2, 11))
    def test_unitary_and_diagonalizes_hopping(self, S):
        U = mode_transform(S)
        np.testing.assert_allclose(U @ U.conj().T, np.eye(S), atol=1e-14)
        h = hopping_hamiltonian(build_basis(S, 1), 1.0).matrix
        # a = U^+ alpha, so H in the alpha basis is U h U^+
        D = U @ h @ U.conj().T
        np.testing.assert_allclose(D, np.diag(-2 * np.cos(2 * np.pi * np.arange(S) / S)), atol=1e-13)


class TestTransferMatrix:
    @pytest.mark.parametrize("S", [2, 3, 6, 9])
    def test_identity_at_zero(self, S):
        np.testing.assert_allclose(transfer_matrix(S, 0.0).matrix, np.eye(S), atol=1e-15)

    def test_tritter_matrix(self):
        w = np.exp(2j * np.pi / 3)
        R3 = np.array([[1, w, w], [w, 1, w], [w, w, 1]]) / np.sqrt(3)
        assert global_phase_distance(transfer_matrix(3, TRITTER_TIME).matrix, R3) <= 1e-12
        # a genuine difference is not hidden by the phase fit
        assert global_phase_distance(transfer_matrix(3, 0.7).matrix, R3) > 1e-3

    def test_tritter_omegas_formula(self):
        Jt = 0.81
        o1 = np.exp(2j * Jt) + 2 * np.exp(-1j * Jt)
        o2 = np.exp(2j * Jt) - np.exp(-1j * Jt)
        R = transfer_matrix(3, Jt).matrix
        np.testing.assert_allclose(R, np.array([[o1, o2, o2], [o2, o1, o2], [o2, o2, o1]]) / 3, atol=1e-15)

    def test_quarter_balanced(self):
        np.testing.assert_allclose(np.abs(transfer_matrix(4, np.pi / 4).matrix), 0.5, atol=1e-14)

    @pytest.mark.parametrize("S,Jt", [(3, 0.4), (5, 2.2), (7, -1.3), (9, 17.0), (2, 0.9)])
    def test_matches_matrix_exponential(self, S, Jt):
        np.testing.assert_allclose(transfer_matrix(S, Jt).matrix, expm_oracle(S, Jt), atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 9), st.floats(-50, 50), st.floats(-50, 50))
    def test_group_property(self, S, t1, t2):
        lhs = (transfer_matrix(S, t1) @ transfer_matrix(S, t2)).matrix
        np.testing.assert_allclose(lhs, transfer_matrix(S, t1 + t2).matrix, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 9), st.floats(-1000, 1000))
    def test_unitary_circulant_symmetric(self, S, Jt):
        R = transfer_matrix(S, Jt)
        assert R.unitarity_error() <= 1e-12
        m = R.matrix
        for r in range(S):
            np.testing.assert_allclose(np.roll(m[0], r), m[r], atol=1e-12)
        np.testing.assert_allclose(m, m.T, atol=1e-12)

    def test_vectorized_first_row(self):
        t = np.array([0.1, 2.0, 33.0])
        rows = first_row(5, t)
        for i, ti in enumerate(t):
            np.testing.assert_allclose(rows[i], transfer_matrix(5, ti).first_row, atol=1e-15)


class TestOmegas:
    def test_tritter(self):
        Jt = 1.7
        om = omegas(3, Jt)
        assert len(om) == 2
        o1 = abs(np.exp(2j * Jt) + 2 * np.exp(-1j * Jt)) / 3
        o2 = abs(np.exp(2j * Jt) - np.exp(-1j * Jt)) / 3
        assert om[0].modulus == pytest.approx(o1) and om[1].modulus == pytest.approx(o2)
        assert [o.multiplicity for o in om] == [1, 2]

    @pytest.mark.parametrize("S", range(3, 11))
    def test_count(self, S):
        om = omegas(S, 1.234)
        expected = (S + 1) // 2 if S % 2 else (S + 2) // 2
        assert len(om) == expected
        assert sum(o.multiplicity for o in om) == S
        # the grouping is genuine: mirrored entries coincide
        row = np.abs(first_row(S, 1.234))
        np.testing.assert_allclose(row, row[(-np.arange(S)) % S], atol=1e-14)


class TestChi:
    def test_tritter_balanced(self):
        assert chi(3, TRITTER_TIME) <= 1e-12

    @pytest.mark.parametrize("S", [2, 3, 5, 8])
    def test_identity_value(self, S):
        assert chi(S, 0.0) == pytest.approx(2 - 2 / np.sqrt(S), abs=1e-14)

    def test_vectorized(self):
        t = np.linspace(0, 10, 7)
        np.testing.assert_allclose(chi(5, t), [chi(5, x) for x in t], atol=1e-15)

    def test_s6_period(self):
        t = np.linspace(0, 2 * np.pi, 1000)
        np.testing.assert_allclose(chi(6, t + 2 * np.pi), chi(6, t), atol=1e-12)

    def test_five_site_reported_time_is_near_balanced(self):
        # The reported S=5 operating point sits in a chi basin of depth ~2.6e-4.
        assert chi(5, 5.2 * np.pi) < 6e-4


class TestBalanceSearch:
    def test_tritter(self):
        r = find_balance_time(3, (0, 10))
        assert r.balanced
        assert r.tau == pytest.approx(TRITTER_TIME, abs=1e-8)
        assert r.chi <= 1e-12

    def test_quarter(self):
        r = find_balance_time(4, (0, 10))
        assert r.balanced and r.tau == pytest.approx(np.pi / 4, abs=1e-8)

    def test_six_sites_never_balance(self):
        r = find_balance_time(6, (0, 10 * np.pi))
        assert r.status == "unbalanced"
        assert r.chi > 1e-4

    def test_smallest_qualifying_time(self):
        # S=3 balances again at 4 pi/9 + ...; the first one must win
        r = find_balance_time(3, (0.5, 30))
        assert r.tau == pytest.approx(TRITTER_TIME, abs=1e-8)
        later = find_balance_time(3, (1.0, 30))
        assert later.tau > 1.0 and later.chi <= 1e-4

    def test_result_invariants(self):
        r = find_balance_time(5, (0, 60))
        assert r.balanced and r.chi <= r.threshold
        np.testing.assert_allclose(np.abs(np.array(r.omega_moduli) - 1 / np.sqrt(5)), 0, atol=np.sqrt(r.chi))

    def test_unbalanced_reports_global_minimum(self):
        r = find_balance_time(5, (0, 20), threshold=1e-8)
        assert r.status == "unbalanced"
        t = np.arange(0, 20, 1e-3)
        assert r.chi <= chi(5, t).min() + 1e-12

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            find_balance_time(3, (2, 1))
        with pytest.raises(ValueError):
            find_balance_time(3, (0, 1), threshold=0)


class TestInverse:
    def test_tritter_cubed_is_identity(self):
        assert inverse_splitter_fidelity(3, TRITTER_TIME) == pytest.approx(1, abs=1e-10)

    def test_closed_form_matches_matrix_power(self):
        tau = 16.3
        R = transfer_matrix(5, tau).matrix
        RS = np.linalg.matrix_power(R, 5)
        assert inverse_splitter_fidelity(5, tau) == pytest.approx(np.mean(np.abs(np.diag(RS)) ** 2), abs=1e-12)

    def test_reported_five_site_time(self):
        assert inverse_splitter_fidelity(5, 5.2 * np.pi) == pytest.approx(0.96, abs=0.01)


class TestSingleParticle:
    def test_zero_time(self):
        s = SingleParticleState(4, np.array([0.6, 0.8j, 0, 0]))
        np.testing.assert_allclose(evolve_single_particle(s, 0).amplitudes, s.amplitudes, atol=1e-15)

    def test_tritter_moduli(self):
        out = evolve_single_particle(SingleParticleState.at_site(3, 0), TRITTER_TIME)
        np.testing.assert_allclose(np.abs(out.amplitudes), 1 / np.sqrt(3), atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 9), st.floats(-100, 100), st.integers(0, 2 ** 31 - 1))
    def test_norm_preserved(self, S, Jt, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=S) + 1j * rng.normal(size=S)
        s = SingleParticleState(S, v / np.linalg.norm(v))
        assert np.linalg.norm(evolve_single_particle(s, Jt).amplitudes) == pytest.approx(1, abs=1e-12)

    def test_momentum_amplitudes(self):
        s = SingleParticleState.at_site(4, 0)
        np.testing.assert_allclose(np.abs(s.momentum_amplitudes), 0.5, atol=1e-15)


class TestPhaseStructure:
    @pytest.mark.parametrize("Jt", [0.3, 1.1, 2.7])
    def test_four_sites(self, Jt):
        rep = even_phase_structure_check(4, Jt, tol=1e-9)
        assert rep.passed, rep.residuals

    def test_six_sites_random_times(self):
        rng = np.random.default_rng(1234)
        for Jt in rng.uniform(0, 2 * np.pi, 50):
            assert even_phase_structure_check(6, Jt, tol=1e-9).passed

    @pytest.mark.parametrize("S", [8, 10])
    def test_larger_even_rings(self, S):
        assert all(even_phase_structure_check(S, t).passed for t in (0.5, 7.1, 40.0))

    def test_odd_ring_fails(self):
        assert not even_phase_structure_check(5, 1.1, tol=1e-9).passed

    def test_adjacent_phase_surrogate(self):
        t = np.linspace(0.01, 2 * np.pi, 2000)
        allowed = np.array([-np.pi, -np.pi / 2, 0, np.pi / 2, np.pi])

        def off_lattice(S):
            rows = first_row(S, t)
            keep = (np.abs(rows[:, 0]) > 1e-9) & (np.abs(rows[:, 1]) > 1e-9)
            ph = adjacent_phase(S, t)[keep]
            return np.min(np.abs(ph[:, None] - allowed[None, :]), axis=1) > 1e-3

        assert off_lattice(5).any()
        assert not off_lattice(4).any()
        assert not off_lattice(6).any()
