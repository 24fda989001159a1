import math
from itertools import combinations_with_replacement

import numpy as np
import pytest

from gibbsmarkov.clusters import (
    count_bound_check,
    counting_bound,
    enumerate_connected,
    enumerate_connected_to_region,
    enumerate_connected_to_vertex,
    enumerate_linking,
    is_connected,
    is_connected_to,
    links_regions,
    make_cluster,
    overlap_counts,
)
from gibbsmarkov.spin_model import FiniteRange, PAULI, build_graph, build_hamiltonian

ZZ = np.kron(PAULI["Z"], PAULI["Z"])


def chain_ham(n, beta=0.001):
    g = build_graph(n, [(i, i + 1) for i in range(n - 1)])
    terms = [((i, i + 1), 0.4 * ZZ) for i in range(n - 1)]
    return build_hamiltonian(g, terms, FiniteRange(1), beta=beta)


def grid_ham(rows, cols, beta=0.001):
    def vid(i, j):
        return i * cols + j

    edges = []
    for i in range(rows):
        for j in range(cols):
            if j + 1 < cols:
                edges.append((vid(i, j), vid(i, j + 1)))
            if i + 1 < rows:
                edges.append((vid(i, j), vid(i + 1, j)))
    g = build_graph(rows * cols, edges)
    terms = [(e, 0.2 * ZZ) for e in edges]
    return build_hamiltonian(g, terms, FiniteRange(1), beta=beta)


class TestMultiplicity:
    def test_distinct_elements(self):
        ham = chain_ham(4)
        assert make_cluster(ham, (0, 1)).multiplicity == 2
        assert make_cluster(ham, (0, 1, 2)).multiplicity == 6

    def test_repeats_divide_out(self):
        ham = chain_ham(4)
        assert make_cluster(ham, (0, 0)).multiplicity == 1
        assert make_cluster(ham, (0, 0, 1)).multiplicity == 3
        assert make_cluster(ham, (0, 0, 1, 1)).multiplicity == 6

    def test_multiplicities_sum_to_sequences(self):
        ham = chain_ham(4)
        t = len(ham.terms)
        for m in (1, 2, 3):
            total = sum(
                make_cluster(ham, idxs).multiplicity
                for idxs in combinations_with_replacement(range(t), m)
            )
            assert total == t ** m


class TestConnectivity:
    def test_two_term_chain(self):
        # terms 0:{0,1}, 1:{1,2} on a 3-vertex path
        ham = chain_ham(3)
        assert is_connected(ham, make_cluster(ham, (0, 1)))
        assert is_connected(ham, make_cluster(ham, (0, 0)))

    def test_disjoint_edges_disconnected(self):
        ham = chain_ham(4)  # terms 0:{0,1}, 1:{1,2}, 2:{2,3}
        assert not is_connected(ham, make_cluster(ham, (0, 2)))
        assert is_connected(ham, make_cluster(ham, (0, 1, 2)))

    def test_connected_to_region_requires_every_component_to_touch(self):
        ham = chain_ham(5)
        c = make_cluster(ham, (0, 3))  # {0,1} and {3,4}: disconnected
        assert not is_connected(ham, c)
        assert is_connected_to(ham, c, (0, 1, 2, 3))  # both touch the region
        assert not is_connected_to(ham, c, (0,))

    def test_linking_needs_both_anchors(self):
        ham = chain_ham(3)
        c = make_cluster(ham, (0, 1))
        assert links_regions(ham, c, (0,), (2,))
        assert not links_regions(ham, make_cluster(ham, (0, 0)), (0,), (2,))


class TestEnumeration:
    def test_path_m1_from_endpoint(self):
        ham = chain_ham(3)
        out = [c.term_indices for c in enumerate_connected_to_vertex(ham, 0, 1)]
        assert out == [(0,)]

    def test_path_m2_from_endpoint(self):
        ham = chain_ham(3)
        out = {c.term_indices for c in enumerate_connected_to_vertex(ham, 0, 2)}
        assert out == {(0, 0), (0, 1)}

    def test_exhaustive_equivalence_on_grid(self):
        ham = grid_ham(3, 3)
        center = 4
        for m in (1, 2, 3):
            streamed = {
                c.term_indices
                for c in enumerate_connected_to_vertex(ham, center, m)
            }
            brute = {
                idxs
                for idxs in combinations_with_replacement(range(len(ham.terms)), m)
                if is_connected_to(ham, make_cluster(ham, idxs), (center,))
            }
            assert streamed == brute

    def test_linking_below_distance_is_empty(self):
        ham = chain_ham(3)
        assert list(enumerate_linking(ham, (0,), (2,), 1)) == []

    def test_linking_unique_pair(self):
        ham = chain_ham(3)
        out = [c.term_indices for c in enumerate_linking(ham, (0,), (2,), 2)]
        assert out == [(0, 1)]

    def test_linking_matches_brute_force_on_long_chain(self):
        ham = chain_ham(6)
        a, c = (0,), (5,)
        for m in (4, 5):
            streamed = {
                w.term_indices for w in enumerate_linking(ham, a, c, m)
            }
            brute = {
                idxs
                for idxs in combinations_with_replacement(range(len(ham.terms)), m)
                if links_regions(ham, make_cluster(ham, idxs), a, c)
            }
            assert streamed == brute

    def test_canonical_order_and_no_duplicates(self):
        ham = grid_ham(2, 3)
        seen = [c.term_indices for c in enumerate_connected_to_region(ham, (0,), 3)]
        assert seen == sorted(set(seen))

    def test_linking_subset_of_connected(self):
        ham = chain_ham(5)
        linking = {c.term_indices for c in enumerate_linking(ham, (0,), (4,), 4)}
        connected = {c.term_indices for c in enumerate_connected(ham, 4)}
        assert linking <= connected
        for idxs in linking:
            sup = set(make_cluster(ham, idxs).support)
            assert 0 in sup and 4 in sup


class TestOverlapCounts:
    def test_two_overlapping(self):
        ham = chain_ham(3)
        assert overlap_counts(ham, make_cluster(ham, (0, 1))) == (1, 1)

    def test_single_element(self):
        ham = chain_ham(3)
        assert overlap_counts(ham, make_cluster(ham, (0,))) == (0,)

    def test_repeated_copies_count_toward_each_other(self):
        ham = chain_ham(3)
        assert overlap_counts(ham, make_cluster(ham, (0, 0))) == (1, 1)

    def test_five_subsystem_hub_configuration(self):
        # one hub support touching the other four, plus a single extra
        # overlap X1-X3: counts must come out (2, 1, 2, 1, 4)
        g = build_graph(5, [(i, i + 1) for i in range(4)])
        supports = [(0, 1), (2,), (1, 3), (4,), (0, 2, 3, 4)]
        terms = [(s, (0.1 / len(s)) * np.eye(2 ** len(s))) for s in supports]
        ham = build_hamiltonian(g, terms, FiniteRange(4), beta=0.001)
        order = {t.support: i for i, t in enumerate(ham.terms)}
        idxs = tuple(order[tuple(s)] for s in supports)
        c = make_cluster(ham, idxs)
        counts = overlap_counts(ham, c)
        by_original = tuple(
            counts[c.term_indices.index(order[tuple(s)])] for s in supports
        )
        assert by_original == (2, 1, 2, 1, 4)


class TestCountingBound:
    def test_zero_cluster_case(self):
        g = build_graph(3, [(0, 1), (1, 2)])
        ham = build_hamiltonian(g, [], FiniteRange(1), beta=0.001)
        measured, bound = count_bound_check(ham, (0, 1), 2)
        assert measured == 0
        assert bound >= 0

    def test_chain_m2(self):
        ham = chain_ham(4)
        measured, bound = count_bound_check(ham, (0, 1), 2)
        assert measured <= bound
        assert bound == pytest.approx(2 * (3 * 4 * ham.graph.degree ** 2) ** 2)

    def test_grid_row_m3(self):
        ham = grid_ham(3, 3)
        measured, bound = count_bound_check(ham, (0, 1, 2), 3)
        assert measured <= bound

    def test_bound_formula(self):
        ham = chain_ham(5)
        assert counting_bound(ham, 3, 2) == pytest.approx(
            3 * (3 * 2 ** 2 * 2 ** 2) ** 2
        )
