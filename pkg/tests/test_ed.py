"""Sanity checks of the dense-diagonalization reference on solvable cases."""

import math

import numpy as np
import pytest

from gibbsmarkov import ed
from gibbsmarkov.bounds import critical_beta
from gibbsmarkov.operators import SupportedOperator
from gibbsmarkov.random_models import random_chain
from gibbsmarkov.spin_model import FiniteRange, PAULI, build_graph, build_hamiltonian

BETA_C = critical_beta(2)


def free_ham(n, beta=0.1):
    g = build_graph(n, [(i, i + 1) for i in range(n - 1)])
    return build_hamiltonian(g, [], FiniteRange(1), beta=beta)


def ferro_chain(n, beta, j=0.5):
    g = build_graph(n, [(i, i + 1) for i in range(n - 1)])
    zz = np.kron(PAULI["Z"], PAULI["Z"])
    terms = [((i, i + 1), -j * zz) for i in range(n - 1)]
    return build_hamiltonian(g, terms, FiniteRange(1), beta=beta)


class TestExactGibbs:
    def test_free_model(self):
        st = ed.exact_gibbs(free_ham(4))
        assert st.log_z == pytest.approx(4 * math.log(2))
        assert np.allclose(st.rho.matrix, np.eye(16) / 16)
        assert ed.region_entropy(st, (0, 1)) == pytest.approx(2 * math.log(2))

    def test_single_site_field(self):
        beta, a = 0.7, 0.6
        g = build_graph(1, [])
        ham = build_hamiltonian(g, [((0,), a * PAULI["Z"])], FiniteRange(1), beta=beta)
        st = ed.exact_gibbs(ham)
        assert st.log_z == pytest.approx(math.log(2 * math.cosh(beta * a)))
        p_up = math.exp(-beta * a) / (2 * math.cosh(beta * a))
        assert st.rho.matrix[0, 0].real == pytest.approx(p_up)

    def test_size_cap(self):
        with pytest.raises(ed.EDLimitError):
            ed.exact_gibbs(free_ham(5), limit=4)

    def test_large_beta_does_not_overflow(self):
        st = ed.exact_gibbs(ferro_chain(3, beta=500.0))
        assert math.isfinite(st.log_z)
        assert np.isfinite(st.rho.matrix).all()


class TestEntropiesAndCmi:
    def test_empty_region_entropy_is_zero(self):
        st = ed.exact_gibbs(free_ham(3))
        assert ed.region_entropy(st, ()) == 0.0

    def test_ground_state_mixture_mutual_information(self):
        # deep in the ferromagnetic phase the state is (|000><000| + |111><111|)/2:
        # end spins share one bit, and conditioning on the middle spin
        # explains it away completely
        st = ed.exact_gibbs(ferro_chain(3, beta=200.0))
        assert ed.exact_cmi(st, (0,), (), (2,)) == pytest.approx(math.log(2), abs=1e-9)
        assert ed.exact_cmi(st, (0,), (1,), (2,)) == pytest.approx(0.0, abs=1e-9)

    def test_strong_subadditivity(self):
        ham = random_chain(6, beta=0.9 * BETA_C, seed=83)
        st = ed.exact_gibbs(ham)
        for a, b, c in [((0,), (1,), (2,)), ((0, 1), (2, 3), (4, 5)), ((1,), (), (4,))]:
            assert ed.exact_cmi(st, a, b, c) >= -1e-12

    def test_rejects_overlapping_regions(self):
        st = ed.exact_gibbs(free_ham(3))
        with pytest.raises(ValueError):
            ed.exact_cmi(st, (0,), (0, 1), (2,))


class TestEffectiveHamiltonian:
    def test_full_region_returns_hamiltonian(self):
        ham = random_chain(4, beta=0.5 * BETA_C, seed=89)
        st = ed.exact_gibbs(ham)
        eff = ed.exact_effective_hamiltonian(st, range(4))
        want = ed.hamiltonian_matrix(ham).matrix
        assert np.max(np.abs(eff.matrix - want)) < 1e-9

    def test_free_model_gives_pure_scalar(self):
        ham = free_ham(4, beta=0.3)
        st = ed.exact_gibbs(ham)
        eff = ed.exact_effective_hamiltonian(st, (0, 1))
        # -beta^-1 log(2^2 * I) on the kept two sites
        want = -(2 * math.log(2) / 0.3) * np.eye(4)
        assert np.max(np.abs(eff.matrix - want)) < 1e-12


class TestCorrelations:
    def test_correlation_bounded_by_cmi(self):
        ham = random_chain(6, beta=0.9 * BETA_C, seed=97)
        st = ed.exact_gibbs(ham)
        op_a = SupportedOperator((0,), PAULI["X"], local_dim=2)
        op_c = SupportedOperator((5,), PAULI["Z"], local_dim=2)
        cor = ed.operator_correlation(st, op_a, op_c)
        cmi = ed.exact_cmi(st, (0,), (1, 2, 3, 4), (5,))
        assert cor ** 2 <= 2.0 * cmi + 1e-9

    def test_product_state_has_no_correlation(self):
        st = ed.exact_gibbs(free_ham(4))
        op_a = SupportedOperator((0,), PAULI["Z"], local_dim=2)
        op_b = SupportedOperator((3,), PAULI["Z"], local_dim=2)
        assert ed.operator_correlation(st, op_a, op_b) == pytest.approx(0.0, abs=1e-14)

    def test_rejects_overlapping_supports(self):
        st = ed.exact_gibbs(free_ham(3))
        op = SupportedOperator((1,), PAULI["Z"], local_dim=2)
        with pytest.raises(ValueError):
            ed.operator_correlation(st, op, op)
