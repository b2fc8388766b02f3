import math
from itertools import combinations, permutations

import numpy as np
import pytest

from concentra.errors import DomainError, SchemaError
from concentra.models import (
    ErgmSpec,
    GlauberChain,
    IsingSpec,
    Motif,
    SINGLE_EDGE,
    TRIANGLE,
    TWO_STAR,
    build_coloring,
    build_ergm,
    build_ising,
    curie_weiss_spec,
    edge_index_map,
    glauber_sample,
    read_samples_binary,
    subgraph_copy_count,
    triangle_count_tensor,
    write_samples_binary,
    write_samples_csv,
)
from concentra.funcs import MultilinearPoly
from concentra.space import enumerate_configurations, rademacher


class TestIsing:
    def test_zero_couplings_give_uniform(self):
        mu, report = build_ising(IsingSpec(np.zeros((3, 3)), np.zeros(3)))
        np.testing.assert_allclose(mu.prob_table(), np.full(8, 1 / 8), atol=1e-12)
        assert report.satisfied

    def test_two_site_table_by_hand(self):
        J = np.array([[0.0, 0.3], [0.3, 0.0]])
        mu, _ = build_ising(IsingSpec(J, np.zeros(2)))
        # weights exp(0.3 s1 s2): equal spins exp(0.3), unequal exp(-0.3)
        agree = math.exp(0.3)
        disagree = math.exp(-0.3)
        expected = np.array([agree, disagree, disagree, agree])
        expected /= expected.sum()
        np.testing.assert_allclose(mu.prob_table(), expected, atol=1e-12)

    def test_curie_weiss_condition_matches_beta_below_one(self):
        # J_ij = beta/n: the row-sum condition is beta (n-1)/n < 1
        for n, beta in [(4, 0.9), (4, 1.4), (6, 1.05)]:
            _, report = build_ising(curie_weiss_spec(n, beta))
            assert report.satisfied == (beta * (n - 1) / n < 1.0)
            assert report.max_row_sum == pytest.approx(beta * (n - 1) / n)

    def test_asymmetric_coupling_rejected(self):
        J = np.zeros((2, 2))
        J[0, 1] = 0.5
        with pytest.raises(DomainError):
            IsingSpec(J, np.zeros(2))

    def test_field_enters_report(self):
        _, report = build_ising(IsingSpec(np.zeros((2, 2)), np.array([0.4, -0.9])))
        assert report.max_field == pytest.approx(0.9)


class TestColoring:
    def test_edgeless_graph_is_uniform_over_all_colorings(self):
        mu, report = build_coloring([], 3, 2)
        np.testing.assert_allclose(mu.prob_table(), np.full(8, 1 / 8))
        assert report.satisfied  # 2 >= 2*0 + 1

    def test_triangle_three_colors(self):
        mu, report = build_coloring([(0, 1), (0, 2), (1, 2)], 3, 3)
        assert int((mu.prob_table() > 0).sum()) == 6
        assert np.allclose(mu.prob_table()[mu.prob_table() > 0], 1 / 6)
        assert not report.satisfied  # 3 < 2*2 + 1

    def test_path_two_colors(self):
        mu, _ = build_coloring([(0, 1), (1, 2)], 3, 2)
        assert int((mu.prob_table() > 0).sum()) == 2

    def test_impossible_coloring_rejected(self):
        with pytest.raises(DomainError):
            build_coloring([(0, 1), (0, 2), (1, 2)], 3, 2)


class TestErgm:
    def test_edge_only_model_condition_always_holds(self):
        spec = ErgmSpec(4, (SINGLE_EDGE,), (0.8,))
        _, report = build_ergm(spec)
        assert report.phi_prime_abs_at_one == 0.0
        assert report.satisfied

    def test_triangle_term_condition_threshold(self):
        # Phi'_{|beta|}(1) = 6 |beta_2|: the condition requires |beta_2| < 1/3
        for beta2, ok in [(0.3, True), (0.34, False)]:
            spec = ErgmSpec(4, (SINGLE_EDGE, TRIANGLE), (0.0, beta2))
            _, report = build_ergm(spec)
            assert report.phi_prime_abs_at_one == pytest.approx(6 * abs(beta2))
            assert report.satisfied == ok

    def test_zero_parameters_give_fair_coins(self):
        spec = ErgmSpec(4, (SINGLE_EDGE,), (0.0,))
        mu, _ = build_ergm(spec)
        np.testing.assert_allclose(mu.prob_table(), np.full(64, 1 / 64), atol=1e-12)

    def test_first_motif_must_be_edge(self):
        with pytest.raises(DomainError):
            ErgmSpec(4, (TRIANGLE,), (0.1,))

    def test_disconnected_motif_rejected(self):
        with pytest.raises(DomainError):
            Motif(((0, 1), (2, 3)))

    def test_triangle_tensor_evaluates_to_triangle_count(self):
        n = 5
        tensor = triangle_count_tensor(n)
        poly = MultilinearPoly({3: tensor})
        rng = np.random.default_rng(0)
        index = edge_index_map(n)
        for _ in range(20):
            x = rng.integers(0, 2, size=len(index)).astype(float)
            assert poly.evaluate(x) == pytest.approx(
                subgraph_copy_count(x, TRIANGLE, n), abs=1e-9
            )


class TestSubgraphCounts:
    @staticmethod
    def edge_subset_oracle(x, motif, n):
        """Independent oracle: enumerate edge subsets of the right size and test
        isomorphism to the motif by brute force over vertex bijections."""
        index = edge_index_map(n)
        present = [pair for pair, idx in index.items() if x[idx] > 0.5]
        target = set(motif.edges)
        count = 0
        for subset in combinations(present, motif.n_edges):
            vertices = sorted({v for e in subset for v in e})
            if len(vertices) != motif.n_vertices:
                continue
            edges = {tuple(sorted(e)) for e in subset}
            for perm in permutations(range(motif.n_vertices)):
                mapping = dict(zip(vertices, perm))
                mapped = {tuple(sorted((mapping[u], mapping[v]))) for u, v in edges}
                if mapped == target:
                    count += 1
                    break
        return count

    def test_counts_match_oracle_on_random_graphs(self):
        rng = np.random.default_rng(1)
        for n in (5, 6, 7):
            index = edge_index_map(n)
            for _ in range(5):
                x = (rng.random(len(index)) < 0.5).astype(float)
                for motif in (SINGLE_EDGE, TWO_STAR, TRIANGLE):
                    assert subgraph_copy_count(x, motif, n) == pytest.approx(
                        self.edge_subset_oracle(x, motif, n)
                    )

    def test_closed_forms_on_complete_graph(self):
        n = 5
        x = np.ones(n * (n - 1) // 2)
        assert subgraph_copy_count(x, SINGLE_EDGE, n) == pytest.approx(10)
        assert subgraph_copy_count(x, TRIANGLE, n) == pytest.approx(10)  # C(5,3)
        assert subgraph_copy_count(x, TWO_STAR, n) == pytest.approx(5 * 6)  # n C(n-1,2)


class TestGlauber:
    def test_fixed_seed_reproduces_stream(self):
        mu, _ = build_ising(curie_weiss_spec(3, 0.5))
        s1 = glauber_sample(mu, 40, burn_in=10, thinning=2, seed=9)
        s2 = glauber_sample(mu, 40, burn_in=10, thinning=2, seed=9)
        np.testing.assert_array_equal(s1, s2)
        assert s1.shape == (20, 3)

    def test_sweep_operator_preserves_target(self):
        # applying the one-sweep kernel to the exact distribution reproduces it
        J = np.array([[0.0, 0.25, 0.0], [0.25, 0.0, 0.25], [0.0, 0.25, 0.0]])
        mu, _ = build_ising(IsingSpec(J, np.array([0.1, 0.0, -0.1])))
        space = mu.space
        pi = mu.prob_table()
        rho = pi.copy()
        configs = enumerate_configurations(space)
        for i in range(space.n):
            new_rho = np.zeros_like(rho)
            for idx, row in enumerate(configs):
                cond = mu.conditional(row, i)
                for digit in range(space.shape[i]):
                    changed = row.copy()
                    changed[i] = space.alphabets[i][digit]
                    new_rho[space.index_of(changed)] += rho[idx] * cond[digit]
            rho = new_rho
        np.testing.assert_allclose(rho, pi, atol=1e-10)

    def test_sweep_operator_preserves_coloring_target(self):
        # partially supported target: sections off the support never carry mass
        mu, _ = build_coloring([(0, 1), (0, 2), (1, 2)], 3, 5)
        space = mu.space
        pi = mu.prob_table()
        rho = pi.copy()
        configs = enumerate_configurations(space)
        for i in range(space.n):
            new_rho = np.zeros_like(rho)
            for idx, row in enumerate(configs):
                if rho[idx] == 0.0:
                    continue
                cond = mu.conditional(row, i)
                for digit in range(space.shape[i]):
                    changed = row.copy()
                    changed[i] = space.alphabets[i][digit]
                    new_rho[space.index_of(changed)] += rho[idx] * cond[digit]
            rho = new_rho
        np.testing.assert_allclose(rho, pi, atol=1e-10)

    def test_coloring_sampler_matches_exact_table(self):
        mu, _ = build_coloring([(0, 1), (1, 2)], 3, 3)
        samples = glauber_sample(mu, sweeps=20_000, burn_in=200, thinning=1, seed=11)
        idx = np.array([mu.space.index_of(row) for row in samples])
        counts = np.bincount(idx, minlength=mu.space.size)
        from scipy import stats

        support = mu.prob_table() > 0
        _, p_value = stats.chisquare(counts[support], mu.prob_table()[support] * len(samples))
        assert np.all(counts[~support] == 0)
        assert p_value > 0.01

    def test_product_target_matches_marginals(self):
        from concentra.space import bernoulli_product

        mu = bernoulli_product(4, 0.3)
        samples = glauber_sample(mu, 4000, burn_in=1, seed=3)
        freq = samples.mean(axis=0)
        se = math.sqrt(0.3 * 0.7 / 4000)
        assert np.all(np.abs(freq - 0.3) < 5 * se)

    def test_positive_sweeps_required(self):
        mu, _ = build_ising(curie_weiss_spec(2, 0.1))
        with pytest.raises(DomainError):
            glauber_sample(mu, 0)

    def test_chain_state_stays_in_support(self):
        mu, _ = build_coloring([(0, 1), (0, 2), (1, 2)], 3, 5)
        chain = GlauberChain(mu, seed=1)
        for _ in range(50):
            chain.sweep()
            assert mu.prob_table()[mu.space.index_of(chain.state)] > 0


class TestSampleStreams:
    def test_csv_format(self, tmp_path):
        samples = np.array([[1.0, -1.0], [-1.0, 1.0]])
        path = tmp_path / "samples.csv"
        write_samples_csv(path, samples)
        assert path.read_bytes() == b"1,-1\n-1,1\n"

    def test_binary_round_trip(self, tmp_path):
        mu = rademacher(3)
        samples = glauber_sample(mu, 10, seed=2)
        path = tmp_path / "samples.bin"
        write_samples_binary(path, samples, mu.space)
        raw = path.read_bytes()
        assert raw[:8] == b"CONCSAMP"
        back = read_samples_binary(path, mu.space)
        np.testing.assert_array_equal(back, samples)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTMAGIC" + b"\x00" * 8)
        with pytest.raises(SchemaError):
            read_samples_binary(path, rademacher(1).space)
