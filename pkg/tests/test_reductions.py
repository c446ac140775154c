import random
from fractions import Fraction

import pytest

from knnxai.abductive import FeatureSet, check_sr_bruteforce, minimum_sr_exact
from knnxai.core import HAMMING
from knnxai.counterfactual import cf_hamming_exact, cf_l1_oracle
from knnxai.errors import InputError, PreconditionError, ResourceLimit
from knnxai.reductions import (
    BmcfInstance,
    Graph,
    KnapsackInstance,
    bmcf_padding_needed,
    epsilon_ladder,
    gen_bmcf_cf_hamming,
    gen_check_sr_k3_discrete,
    gen_knapsack_cf_l1,
    gen_vc_minsr_continuous,
    gen_vc_minsr_discrete,
    gen_vc_to_bmcf,
    graph_corpus,
    lift_cf_l1_to_k,
    min_vertex_cover,
    parse_int_list,
    random_connected_graph,
    solve_bmcf_bruteforce,
    solve_knapsack_bruteforce,
    solve_vc_bruteforce,
)


class TestGraph:
    def test_normalises_edges(self):
        G = Graph(3, ((1, 0), (2, 1)))
        assert G.edges == ((0, 1), (1, 2)) and G.m == 2

    @pytest.mark.parametrize("edges", [((0, 0),), ((0, 3),), ((0, 1), (1, 0))])
    def test_rejects_bad_edges(self, edges):
        with pytest.raises(InputError):
            Graph(3, edges)

    def test_families(self):
        assert Graph.complete(4).m == 6
        assert Graph.cycle(5).m == 5
        assert Graph.star(5).m == 4
        assert Graph.path(4).connected()
        assert not Graph(3, ((0, 1),)).connected()

    def test_incidence(self):
        assert Graph.path(3).incidence(1) == (0, 1, 1)


class TestGroundTruth:
    @pytest.mark.parametrize("G,vc", [(Graph.complete(4), 3), (Graph.cycle(5), 3), (Graph.star(6), 1),
                                      (Graph.path(4), 2), (Graph.complete(2), 1)])
    def test_min_vertex_cover(self, G, vc):
        assert min_vertex_cover(G) == vc

    def test_partial_cover(self):
        # one vertex of a triangle leaves one edge uncovered
        assert solve_vc_bruteforce(Graph.complete(3), 1, 1)
        assert not solve_vc_bruteforce(Graph.complete(3), 1, 0)

    def test_knapsack(self):
        assert solve_knapsack_bruteforce(KnapsackInstance((1, 1), (1, 1), 1))
        assert not solve_knapsack_bruteforce(KnapsackInstance((2, 2), (1, 2), 1))

    def test_bmcf(self):
        # flipping T must leave every row with weight at most |T| - 1
        assert solve_bmcf_bruteforce(BmcfInstance(((1, 0, 0),), 1, 0))
        assert not solve_bmcf_bruteforce(BmcfInstance(((1, 1, 0),), 1, 0))
        assert solve_bmcf_bruteforce(BmcfInstance(((1, 1, 0),), 2, 0))
        # slack lets one row stay heavy
        assert solve_bmcf_bruteforce(BmcfInstance(((1, 0, 0), (1, 1, 1)), 1, 1))

    def test_subset_cap(self):
        with pytest.raises(ResourceLimit):
            solve_vc_bruteforce(Graph.path(22), 11)

    def test_knapsack_validation(self):
        with pytest.raises(InputError):
            KnapsackInstance((1, 0), (1, 1), 1)
        with pytest.raises(InputError):
            KnapsackInstance((1,), (1, 2), 1)


def test_epsilon_ladder_strictly_decreasing():
    eps = epsilon_ladder(5)
    assert eps[:2] == [Fraction(1, 4), Fraction(1, 6)]
    assert all(a > b > 0 for a, b in zip(eps, eps[1:]))


class TestVertexCoverFamilies:
    @pytest.mark.parametrize("G", [Graph.complete(2), Graph.complete(3), Graph.path(3), Graph.cycle(4)])
    def test_discrete(self, G):
        inst = gen_vc_minsr_discrete(G)
        inst.check()
        assert len(minimum_sr_exact(inst.dataset, HAMMING, 1, inst.x, G.n)) == min_vertex_cover(G)

    @pytest.mark.parametrize("k", [1, 3])
    @pytest.mark.parametrize("G", [Graph.complete(2), Graph.path(3), Graph.star(4)])
    def test_continuous(self, G, k):
        inst = gen_vc_minsr_continuous(G, k)
        best = minimum_sr_exact(inst.dataset, inst.metric, inst.k, inst.x, G.n)
        assert len(best) == min_vertex_cover(G)

    def test_corpus_is_connected_and_unique(self):
        corpus = graph_corpus(max_vertices=6)
        assert all(G.connected() for G in corpus)
        keys = {(G.n, tuple(sorted(G.edges))) for G in corpus}
        assert len(keys) == len(corpus)

    def test_random_graph_connected(self):
        rng = random.Random(0)
        for n in range(2, 8):
            assert random_connected_graph(n, 0.3, rng).connected()


class TestKnapsackFamily:
    def test_small_yes_and_no(self):
        yes = gen_knapsack_cf_l1(KnapsackInstance((1, 1), (1, 1), 1))
        no = gen_knapsack_cf_l1(KnapsackInstance((2, 2), (1, 2), 1))
        for inst, truth in ((yes, True), (no, False)):
            assert inst.truth["answer"] is truth
            for cur in (inst, lift_cf_l1_to_k(inst, 3), lift_cf_l1_to_k(inst, 5)):
                cur.check()
                assert cf_l1_oracle(cur.dataset, cur.k, cur.x, cur.budget).exists is truth

    def test_lift_needs_odd_k(self):
        inst = gen_knapsack_cf_l1(KnapsackInstance((1,), (1,), 1))
        with pytest.raises(PreconditionError):
            lift_cf_l1_to_k(inst, 4)


class TestBmcfFamily:
    def test_incidence_matrix(self):
        bi = gen_vc_to_bmcf(Graph.path(3), 1)
        assert bi.matrix == ((1, 1, 0, 1), (0, 1, 1, 1))
        assert bi.budget == 2

    def test_padding(self):
        bi = gen_vc_to_bmcf(Graph.complete(2), 1)
        assert bmcf_padding_needed(bi) == 2
        with pytest.raises(PreconditionError):
            gen_bmcf_cf_hamming(bi)
        inst = gen_bmcf_cf_hamming(bi, pad=True)
        assert inst.dataset.dimension == 3 + 2 + 1

    @pytest.mark.parametrize("p", [0, 1])
    def test_round_trip_small(self, p):
        for G in (Graph.path(4), Graph.cycle(4), Graph.star(5), Graph.complete(4)):
            for ell in range(G.n):
                bi = gen_vc_to_bmcf(G, ell, p)
                inst = gen_bmcf_cf_hamming(bi, pad=True)
                assert inst.truth["answer"] == solve_vc_bruteforce(G, ell, p)
                assert cf_hamming_exact(inst.dataset, inst.k, inst.x, inst.budget).exists == inst.truth["answer"]

    def test_duplicate_rows_rejected(self):
        with pytest.raises(PreconditionError):
            gen_bmcf_cf_hamming(BmcfInstance(((1, 0, 0), (1, 0, 0)), 1, 0))


class TestCheckSrFamily:
    @pytest.mark.parametrize("G", [Graph.path(6), Graph.cycle(6), Graph.star(6), Graph.complete(6)])
    def test_empty_set_sufficiency_matches_near_cover(self, G):
        inst = gen_check_sr_k3_discrete(G)
        v = check_sr_bruteforce(inst.dataset, HAMMING, 3, inst.x, FeatureSet((), inst.dataset.dimension))
        assert v.sufficient == inst.truth["empty_sufficient"]

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            gen_check_sr_k3_discrete(Graph.path(4))
        with pytest.raises(PreconditionError):
            gen_check_sr_k3_discrete(Graph.path(6), k=4)


def test_parse_int_list():
    assert parse_int_list("1, 2,3") == (1, 2, 3)
    with pytest.raises(InputError):
        parse_int_list("1,a")
