from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringsplit.core_model import (
    BasisSizeError,
    ConfigurationError,
    FockBasis,
    ImpossibleLossError,
    ManyBodyState,
    RingSpec,
    annihilate_at_site,
    build_basis,
    hopping_hamiltonian,
    interaction_hamiltonian,
    offset_hamiltonian,
    phase_imprint,
    site_populations,
)


def ladder_oracle(S, N, J):
    """Hopping matrix from Kronecker products of truncated ladder operators.

    Built on the full (N+1)^S product space, then restricted to the fixed-N
    states and reordered into the basis order.
    """
    d = N + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    eye = np.eye(d)

    def site_op(op, j):
        out = np.array([[1.0]])
        for k in range(S):
            out = np.kron(out, op if k == j else eye)
        return out

    H = np.zeros((d ** S, d ** S))
    for j in range(S):
        aj, ak = site_op(a, j), site_op(a, (j + 1) % S)
        H += -J * (aj.T @ ak + ak.T @ aj)
    basis = build_basis(S, N)
    flat = [int(np.ravel_multi_index(tuple(occ), (d,) * S)) for occ in basis.states]
    return H[np.ix_(flat, flat)]


def condensate(S, N, c):
    """(sum_j c_j a_j^+)^N |0> / sqrt(N!) via the multinomial expansion."""
    basis = build_basis(S, N)
    amps = np.array([
        np.sqrt(factorial(N)) * np.prod([c[j] ** n / np.sqrt(factorial(n)) for j, n in enumerate(occ)])
        for occ in basis.states
    ])
    return ManyBodyState.from_vector(basis, amps)


class TestBasis:
    @pytest.mark.parametrize("S,N,dim", [(3, 2, 6), (9, 5, 1287), (2, 1, 2), (3, 40, 861)])
    def test_dimension(self, S, N, dim):
        assert build_basis(S, N).dim == dim == comb(N + S - 1, S - 1)

    def test_two_sites_one_atom(self):
        assert build_basis(2, 1).states.tolist() == [[1, 0], [0, 1]]

    def test_reverse_lexicographic_order(self):
        states = [tuple(s) for s in build_basis(4, 3).states]
        assert states[0] == (3, 0, 0, 0)
        assert states[-1] == (0, 0, 0, 3)
        assert states == sorted(states, reverse=True)

    @pytest.mark.parametrize("S,N", [(3, 4), (5, 3), (7, 2)])
    def test_lookup_roundtrip(self, S, N):
        b = build_basis(S, N)
        assert np.all(b.states.sum(axis=1) == N)
        assert np.array_equal(b.lookup(b.states), np.arange(b.dim))
        assert all(b.index[tuple(s)] == i for i, s in enumerate(b.states.tolist()))

    def test_lookup_rejects_foreign_state(self):
        with pytest.raises(KeyError):
            build_basis(3, 2).lookup((1, 1, 1))

    def test_size_error_names_configuration(self):
        with pytest.raises(BasisSizeError, match=r"S=12, N=12"):
            build_basis(12, 12)

    @pytest.mark.parametrize("S,N", [(1, 3), (3, 0)])
    def test_invalid(self, S, N):
        with pytest.raises(ConfigurationError):
            build_basis(S, N)


def test_ring_spec_validation():
    spec = RingSpec(S=4, N=2, V=0.1)
    assert spec.epsilon == (0.0,) * 4
    assert spec.site(5) == 1
    with pytest.raises(ConfigurationError):
        RingSpec(S=3, N=1, epsilon=(0.0, 1.0))
    with pytest.raises(ConfigurationError):
        RingSpec(S=3, N=0)


class TestHopping:
    def test_two_site_matrix(self):
        J = 0.7
        H = hopping_hamiltonian(build_basis(2, 1), J).matrix
        np.testing.assert_array_equal(H, [[0, -2 * J], [-2 * J, 0]])

    def test_tritter_spectrum(self):
        J = 1.3
        E = np.linalg.eigvalsh(hopping_hamiltonian(build_basis(3, 1), J).matrix)
        np.testing.assert_allclose(E, sorted([-2 * J, J, J]), atol=1e-12)

    @pytest.mark.parametrize("S", range(3, 10))
    def test_single_particle_band(self, S):
        E = np.linalg.eigvalsh(hopping_hamiltonian(build_basis(S, 1), 1.0).matrix)
        expected = np.sort(-2 * np.cos(2 * np.pi * np.arange(S) / S))
        np.testing.assert_allclose(E, expected, atol=1e-12)

    @pytest.mark.parametrize("S,N", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 3), (5, 2)])
    def test_matches_ladder_operator_oracle(self, S, N):
        H = hopping_hamiltonian(build_basis(S, N), 0.9).matrix
        np.testing.assert_allclose(H, ladder_oracle(S, N, 0.9), atol=1e-14)

    @pytest.mark.parametrize("S,N", [(3, 3), (4, 2), (6, 2)])
    def test_hermitian_and_translation_invariant(self, S, N):
        b = build_basis(S, N)
        H = hopping_hamiltonian(b)
        assert H.hermiticity_error() <= 1e-14
        P = np.zeros((b.dim, b.dim))
        P[b.lookup(np.roll(b.states, 1, axis=1)), np.arange(b.dim)] = 1
        np.testing.assert_allclose(P @ H.matrix, H.matrix @ P, atol=1e-14)


class TestDiagonalTerms:
    def test_interaction_entries(self):
        b = build_basis(3, 2)
        d = np.diag(interaction_hamiltonian(b, 1.0).matrix).real
        assert d[b.lookup((2, 0, 0))] == 2
        b3 = build_basis(3, 3)
        assert np.diag(interaction_hamiltonian(b3, 5.0).matrix)[b3.lookup((1, 1, 1))] == 0
        b4 = build_basis(3, 4)
        assert np.diag(interaction_hamiltonian(b4, 0.5).matrix)[b4.lookup((3, 1, 0))] == 3.0

    def test_offsets(self):
        b = build_basis(3, 4)
        assert not np.any(offset_hamiltonian(b, [0, 0, 0]).matrix)
        eps = 0.3
        assert np.diag(offset_hamiltonian(b, [eps, 0, 0]).matrix)[b.lookup((4, 0, 0))] == pytest.approx(4 * eps)
        with pytest.raises(ConfigurationError):
            offset_hamiltonian(b, [1.0, 2.0])

    def test_offset_evolution_is_linear_phase(self):
        from ringsplit.dynamics import propagate

        b = build_basis(3, 1)
        phi, t = 0.37, 2.5
        # exp(-iHt) with eps_j = -j phi / t imprints exp(+i j phi)
        H = offset_hamiltonian(b, [0, -phi / t, -2 * phi / t])
        psi = ManyBodyState.from_vector(b, [1, 1j, -1])
        out = propagate(psi, H, t).amplitudes
        np.testing.assert_allclose(out, np.exp(1j * phi * np.arange(3)) * psi.amplitudes, atol=1e-14)

    def test_diagonal_terms_commute_and_are_hermitian(self):
        b = build_basis(4, 3)
        A = interaction_hamiltonian(b, 0.4)
        B = offset_hamiltonian(b, [0.1, -0.2, 0.3, 0.0])
        assert A.hermiticity_error() == 0 and B.hermiticity_error() == 0
        np.testing.assert_allclose(A.matrix @ B.matrix, B.matrix @ A.matrix, atol=1e-14)
        assert (A + B).terms == {"interaction", "offsets"}


class TestPhaseImprint:
    def test_zero_phases(self):
        psi = condensate(3, 2, [0.6, 0.8j, 0])
        np.testing.assert_array_equal(phase_imprint(psi, [0, 0, 0]).amplitudes, psi.amplitudes)

    def test_single_particle_sign(self):
        b = build_basis(3, 1)
        psi = ManyBodyState.from_vector(b, [1, 1, 1])
        out = phase_imprint(psi, [0, np.pi, 0]).amplitudes
        np.testing.assert_allclose(out * np.sqrt(3), [1, -1, 1], atol=1e-15)

    def test_linear_ramp_is_diagonal_phase_matrix(self):
        phi = 0.9
        b = build_basis(3, 1)
        psi = ManyBodyState.from_vector(b, [0.3, 0.5j, -0.2])
        D = np.diag([1, np.exp(1j * phi), np.exp(2j * phi)])
        np.testing.assert_allclose(phase_imprint(psi, [0, phi, 2 * phi]).amplitudes, D @ psi.amplitudes,
                                   atol=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
    def test_inverse_imprint(self, phases):
        psi = condensate(4, 3, [0.5, 0.5j, -0.5, 0.5])
        back = phase_imprint(phase_imprint(psi, phases), [-p for p in phases])
        np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            phase_imprint(ManyBodyState.fock(build_basis(3, 1), (1, 0, 0)), [0.0, 1.0])


class TestAnnihilate:
    def test_double_occupancy(self):
        psi = ManyBodyState.fock(build_basis(3, 2), (2, 0, 0))
        out, weight = annihilate_at_site(psi, 0)
        assert weight == pytest.approx(2)
        assert out.basis.N == 1
        assert abs(out.amplitudes[out.basis.lookup((1, 0, 0))]) == pytest.approx(1)

    def test_empty_site(self):
        psi = ManyBodyState.fock(build_basis(3, 1), (1, 0, 0))
        with pytest.raises(ImpossibleLossError):
            annihilate_at_site(psi, 1)

    def test_down_to_vacuum(self):
        out, weight = annihilate_at_site(ManyBodyState.fock(build_basis(3, 1), (0, 1, 0)), 1)
        assert out.basis.N == 0 and weight == pytest.approx(1)

    @pytest.mark.parametrize("j", [0, 1, 2])
    def test_condensate_loses_one_atom(self, j):
        c = np.array([0.5, 0.3 + 0.4j, -0.2j])
        c = c / np.linalg.norm(c)
        out, weight = annihilate_at_site(condensate(3, 3, c), j)
        assert weight == pytest.approx(3 * abs(c[j]) ** 2)
        assert abs(out.overlap(condensate(3, 2, c))) == pytest.approx(1, abs=1e-12)


def test_populations_and_state_checks():
    b = build_basis(3, 2)
    psi = ManyBodyState.from_vector(b, np.ones(b.dim))
    assert site_populations(psi).sum() == pytest.approx(2)
    with pytest.raises(ValueError):
        ManyBodyState(b, np.ones(b.dim))
    with pytest.raises(ConfigurationError):
        ManyBodyState(b, np.ones(3) / np.sqrt(3))
    assert FockBasis(3, 2) == b and hash(FockBasis(3, 2)) == hash(b)
