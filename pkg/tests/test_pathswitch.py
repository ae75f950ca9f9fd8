import random
from fractions import Fraction

import numpy as np
import pytest

from switchlab import fixtures
from switchlab import pathswitch as ps
from switchlab.closmodel import ClosSpec
from switchlab.errors import DomainError, PreconditionError


def _random_traffic(rng, k, m, fill=0.8):
    lam = np.array([[rng.uniform(0.05, 1.0) for _ in range(k)] for _ in range(k)])
    lam *= fill * m / max(lam.sum(axis=0).max(), lam.sum(axis=1).max())
    return ps.TrafficMatrix(tuple(map(tuple, lam)), ClosSpec(m=m, n=m, k=k))


def _random_scaled_doubly_stochastic(rng, k, total):
    mat = np.zeros((k, k), dtype=np.int64)
    for _ in range(total):
        perm = list(range(k))
        rng.shuffle(perm)
        for i in range(k):
            mat[i, perm[i]] += 1
    return mat


class TestTrafficMatrix:
    def test_admissibility_enforced(self):
        spec = ClosSpec(m=2, n=2, k=2)
        with pytest.raises(PreconditionError):
            ps.TrafficMatrix(((1.5, 0.6), (0.4, 0.5)), spec)
        ps.TrafficMatrix(((0.9, 0.6), (0.4, 0.5)), spec)  # fine

    def test_shape_checked(self):
        spec = ClosSpec(m=2, n=2, k=2)
        with pytest.raises(PreconditionError):
            ps.TrafficMatrix(((0.1, 0.1, 0.1), (0.1, 0.1, 0.1)), spec)


class TestCapacityMatrix:
    def test_integer_scaling_and_modules(self):
        cap = fixtures.capacity_4x4()
        assert cap.frame_size == 8
        assert cap.modules == 1
        assert (cap.scaled_int().sum(axis=0) == 8).all()

    def test_rejects_uneven_sums(self):
        with pytest.raises(PreconditionError):
            ps.CapacityMatrix([[Fraction(1, 2), Fraction(1, 2)],
                               [Fraction(1, 4), Fraction(3, 4)]], 4)

    def test_rejects_nonintegral_scaling(self):
        with pytest.raises(PreconditionError):
            ps.CapacityMatrix([[Fraction(1, 3), Fraction(2, 3)],
                               [Fraction(2, 3), Fraction(1, 3)]], 4)


class TestAllocateCapacity:
    def test_uniform_rates_share_evenly(self):
        spec = ClosSpec(m=8, n=8, k=4)
        traffic = ps.TrafficMatrix(tuple(tuple(0.5 for _ in range(4)) for _ in range(4)), spec)
        cap = ps.allocate_capacity(traffic)
        assert np.allclose(cap, 2.0, atol=1e-9)

    def test_line_sums_and_dominance(self):
        rng = random.Random(6)
        for _ in range(120):
            k = rng.randint(2, 8)
            m = rng.choice((2, 4, 8))
            traffic = _random_traffic(rng, k, m, fill=rng.uniform(0.3, 0.95))
            cap = ps.allocate_capacity(traffic)
            assert np.allclose(cap.sum(axis=0), m, atol=1e-9)
            assert np.allclose(cap.sum(axis=1), m, atol=1e-9)
            assert (cap > traffic.as_array()).all()

    def test_iterates_monotone(self):
        rng = random.Random(9)
        traffic = _random_traffic(rng, 4, 4)
        cap, history = ps.allocate_capacity(traffic, with_history=True)
        for before, after in zip(history, history[1:]):
            assert (after >= before - 1e-15).all()
            assert after.sum() > before.sum()

    def test_zero_rate_needs_floor(self):
        spec = ClosSpec(m=2, n=2, k=2)
        traffic = ps.TrafficMatrix(((0.0, 0.5), (0.5, 0.3)), spec)
        with pytest.raises(DomainError):
            ps.allocate_capacity(traffic)
        cap = ps.allocate_capacity(traffic, zero_floor=1e-3)
        assert np.allclose(cap.sum(axis=0), 2.0, atol=1e-9)


class TestWeightedDelay:
    def test_double_capacity(self):
        spec = ClosSpec(m=4, n=4, k=3)
        lam = tuple(tuple(0.4 for _ in range(3)) for _ in range(3))
        traffic = ps.TrafficMatrix(lam, spec)
        assert ps.weighted_delay(np.full((3, 3), 0.8), traffic) == pytest.approx(9.0)

    def test_single_path(self):
        spec = ClosSpec(m=2, n=2, k=1)
        traffic = ps.TrafficMatrix(((1.0,),), spec)
        assert ps.weighted_delay(np.array([[2.0]]), traffic) == pytest.approx(1.0)

    def test_unstable_rejected(self):
        spec = ClosSpec(m=2, n=2, k=1)
        traffic = ps.TrafficMatrix(((1.0,),), spec)
        with pytest.raises(DomainError):
            ps.weighted_delay(np.array([[0.9]]), traffic)

    def test_heuristic_close_to_oracle_on_2x2(self):
        rng = random.Random(12)
        for _ in range(200):
            m = rng.choice((1, 2, 4))
            traffic = _random_traffic(rng, 2, m, fill=rng.uniform(0.3, 0.9))
            cap = ps.allocate_capacity(traffic)
            heuristic = ps.weighted_delay(cap, traffic)
            optimum = ps.optimal_delay_2x2(traffic)
            assert heuristic >= optimum - 1e-9
            assert heuristic <= 1.05 * optimum


class TestBvnDecompose:
    def test_permutation_matrix_is_single_state(self):
        perm = [[0, 1], [1, 0]]
        cap = ps.CapacityMatrix.from_integer_matrix(perm, 1)
        dec = ps.bvn_decompose(cap)
        assert dec.state_count == 1
        assert dec.states[0][1] == 1

    def test_uniform_matrix_splits_into_disjoint_permutations(self):
        n = 5
        cap = ps.CapacityMatrix.from_integer_matrix([[1] * n for _ in range(n)], n)
        dec = ps.bvn_decompose(cap)
        assert dec.state_count == n
        total = sum(p for p, _ in ((s[0], s[1]) for s in dec.states))
        assert (total == 1).all()
        assert all(w == Fraction(1, n) for _, w in dec.states)

    def test_reference_matrix_decomposition(self):
        cap = fixtures.capacity_4x4()
        dec = ps.bvn_decompose(cap)
        assert len(dec.permutations) == 8
        for perm in dec.permutations:
            assert (perm.sum(axis=0) == 1).all() and (perm.sum(axis=1) == 1).all()
        assert dec.state_count <= min(8, 4 * 4 - 2 * 4 + 2)
        assert dec.reconstruct() == [list(row) for row in cap.entries]

    def test_reference_states_reconstruct_exactly(self):
        cap = fixtures.capacity_4x4()
        for states in (fixtures.capacity_4x4_states(), fixtures.capacity_4x4_alt_states()):
            total = [[Fraction(0)] * 4 for _ in range(4)]
            for pattern, weight in states:
                for i in range(4):
                    for j in range(4):
                        total[i][j] += weight * int(pattern[i, j])
            assert total == [list(row) for row in cap.entries]

    def test_random_matrices_reconstruct(self):
        rng = random.Random(21)
        for _ in range(150):
            k = rng.randint(2, 8)
            f = rng.randint(1, 16)
            m = rng.choice((1, 1, 2))
            mat = _random_scaled_doubly_stochastic(rng, k, m * f)
            cap = ps.CapacityMatrix.from_integer_matrix(mat.tolist(), f)
            dec = ps.bvn_decompose(cap)
            assert dec.reconstruct() == [list(row) for row in cap.entries]
            assert sum(w for _, w in dec.states) == 1
            # K <= F holds structurally; the tighter Caratheodory-style bound
            # applies to minimal regroupings, not greedy extraction order
            assert dec.state_count <= f

    def test_module_count_disagreement_rejected(self):
        cap = fixtures.capacity_4x4()
        with pytest.raises(PreconditionError):
            ps.bvn_decompose(cap, modules=2)


class TestBandlimitAndRound:
    def test_already_quantized_is_exact(self):
        cap = fixtures.capacity_4x4()
        rounded, err = ps.bandlimit_and_round(cap, 8)
        assert err == 0.0
        assert rounded == cap

    def test_line_sums_preserved_and_error_bounded(self):
        rng = random.Random(33)
        for _ in range(60):
            k = rng.randint(2, 6)
            m = rng.choice((1, 2, 4))
            traffic = _random_traffic(rng, k, m, fill=0.7)
            cap = ps.allocate_capacity(traffic)
            for f in (16, 32, 64, 128):
                rounded, err = ps.bandlimit_and_round(cap, f, modules=m)
                scaled = rounded.scaled_int()
                assert (scaled.sum(axis=0) == m * f).all()
                assert (scaled.sum(axis=1) == m * f).all()
                assert err <= 1.0 / f + 1e-12

    def test_error_shrinks_with_frame_size(self):
        rng = random.Random(35)
        traffic = _random_traffic(rng, 4, 2, fill=0.8)
        cap = ps.allocate_capacity(traffic)
        errs = [ps.bandlimit_and_round(cap, f, modules=2)[1] for f in (16, 32, 64, 128)]
        assert errs[-1] < errs[0]

    def test_bandlimited_state_count(self):
        # entries capped at b/f force the frame to satisfy f <= b*k/m
        b, k, m, f = 2, 4, 1, 8
        mat = np.zeros((k, k), dtype=np.int64)
        for shift in range(k):
            for i in range(k):
                mat[i, (i + shift) % k] += b  # each cyclic shift used b times
        cap = ps.CapacityMatrix.from_integer_matrix(mat.tolist(), f)
        assert int(cap.scaled_int().max()) <= b
        assert f <= b * k / m
        dec = ps.bvn_decompose(cap)
        assert dec.state_count <= f
