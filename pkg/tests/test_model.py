import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from olsucb import (
    ActionSet,
    CovarianceMatrix,
    GammaMatrix,
    ProblemInstance,
    build_msubsets,
    build_parallel_paths,
    compute_gaps,
    dominance_check,
    greedy_init_cover,
    validate_covariance,
)
from olsucb.errors import (
    InvalidActionSet,
    InvalidGamma,
    InvalidGammaMatrix,
    NotPositiveSemiDefinite,
    NotSymmetric,
    DimensionMismatch,
    TooManyActions,
)
from olsucb.model import block_covariance

from conftest import random_psd


class TestValidateCovariance:
    def test_identity_accepted(self):
        c = validate_covariance(np.eye(3))
        assert c.d == 3

    def test_indefinite_rejected_with_eigenvalue(self):
        # eigenvalues of [[1,2],[2,1]] are 3 and -1
        with pytest.raises(NotPositiveSemiDefinite) as exc:
            validate_covariance([[1.0, 2.0], [2.0, 1.0]])
        assert exc.value.min_eigenvalue == pytest.approx(-1.0)
        assert "-1.0" in str(exc.value)

    def test_positive_definite_accepted(self):
        # eigenvalues 1.5 and 0.5
        c = validate_covariance([[1.0, 0.5], [0.5, 1.0]])
        assert np.allclose(np.linalg.eigvalsh(c.entries), [0.5, 1.5])

    def test_asymmetric_rejected(self):
        with pytest.raises(NotSymmetric):
            validate_covariance([[1.0, 0.1], [0.0, 1.0]])

    def test_not_square(self):
        with pytest.raises(DimensionMismatch):
            validate_covariance(np.ones((2, 3)))

    def test_small_negative_eigenvalue_tolerated(self):
        c = np.diag([1.0, -5e-11])
        validate_covariance(c)

    def test_immutable(self):
        c = validate_covariance(np.eye(2))
        with pytest.raises(ValueError):
            c.entries[0, 0] = 3.0


class TestGammaMatrix:
    def test_negative_entry(self):
        with pytest.raises(InvalidGammaMatrix):
            GammaMatrix([[1.0, -0.1], [-0.1, 1.0]])

    def test_correlation_above_one(self):
        # a correlation above one is caught at the PSD stage already
        with pytest.raises((InvalidGammaMatrix, NotPositiveSemiDefinite)):
            GammaMatrix([[1.0, 2.5], [2.5, 4.0]])
        GammaMatrix([[1.0, 2.0], [2.0, 4.0]])

    def test_ceiling_check_beyond_psd_tolerance(self):
        # within the PSD tolerance but above the explicit ceiling
        eps = 5e-11
        with pytest.raises(InvalidGammaMatrix):
            GammaMatrix([[1.0, 1.0 + eps], [1.0 + eps, 1.0]])

    def test_action_correlation(self):
        g = GammaMatrix(block_covariance(2, 2, 0.3, 2.0))
        assert g.action_correlation((0, 1)) == pytest.approx(0.3)
        assert g.action_correlation((0, 2)) == 0.0
        assert g.action_correlation((3,)) == 0.0

    def test_zero_diagonal_skipped(self):
        g = GammaMatrix(np.diag([0.0, 1.0]))
        assert g.action_correlation((0, 1)) == 0.0


class TestDominance:
    def test_equal_matrices_pass(self, rng):
        c = CovarianceMatrix(block_covariance(2, 2, 0.4))
        rep = dominance_check(c, GammaMatrix(c.entries), 1000, rng)
        assert rep.passed and rep.worst_margin == 0.0

    def test_identity_vs_zero_fails(self, rng):
        rep = dominance_check(CovarianceMatrix(np.eye(3)), GammaMatrix(np.zeros((3, 3))), 50, rng)
        assert not rep.passed
        assert rep.worst_margin < 0

    def test_block_half_dominated_by_full_block(self, rng):
        c = build_parallel_paths(3, 2, 0.5).cov
        g = GammaMatrix(block_covariance(3, 2, 1.0))
        rep = dominance_check(c, g, 10**4, rng)
        assert rep.passed
        # brute-force oracle: v'(G - C)v = 0.5 * sum_blocks[(sum v)^2 - sum v^2]
        v = 1.0 - rng.random((10**4, 6))
        blocks = v.reshape(-1, 3, 2)
        oracle = 0.5 * ((blocks.sum(axis=2) ** 2).sum(axis=1) - (v**2).sum(axis=1))
        direct = np.einsum("ki,ij,kj->k", v, g.entries - c.entries, v)
        np.testing.assert_allclose(direct, oracle, rtol=1e-12, atol=1e-12)
        assert oracle.min() >= 0

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            dominance_check(CovarianceMatrix(np.eye(2)), GammaMatrix(np.eye(3)), 10, rng)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_self_dominance(self, d, seed):
        r = np.random.default_rng(seed)
        c = CovarianceMatrix(random_psd(r, d))
        assert dominance_check(c, c.entries, 200, r).passed


class TestActionSet:
    def test_msubsets_order(self):
        a = build_msubsets(3, 2)
        np.testing.assert_array_equal(a.incidence, [[1, 1, 0], [1, 0, 1], [0, 1, 1]])

    def test_full_action(self):
        a = build_msubsets(3, 3)
        assert a.indices == ((0, 1, 2),)

    def test_cap(self):
        with pytest.raises(TooManyActions):
            build_msubsets(30, 15, cap=10**6)

    def test_incidence_constructor(self):
        a = ActionSet(3, 2, [[1, 1, 0], [0, 1, 1]])
        assert a.indices == ((0, 1), (1, 2))

    @pytest.mark.parametrize(
        "actions",
        [
            [],
            [(0, 1), (0, 1)],
            [(0, 1), (2,)],
            [(0, 1)],  # arm 2 uncovered
        ],
    )
    def test_rejections(self, actions):
        with pytest.raises(InvalidActionSet):
            ActionSet.from_indices(3, 2, actions)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 7).flatmap(lambda d: st.tuples(st.just(d), st.integers(1, d))))
    def test_popcount_and_roundtrip(self, dm):
        d, m = dm
        a = build_msubsets(d, m)
        assert (a.incidence.sum(axis=1) == m).all()
        inst = ProblemInstance(np.zeros(d), np.eye(d), a)
        back = ProblemInstance.from_json(json.loads(json.dumps(inst.to_json())))
        assert back.actions == a
        assert (back.actions.incidence.sum(axis=1) == m).all()


class TestGreedyCover:
    def test_parallel_paths_all(self):
        inst = build_parallel_paths(5, 2, 0.0)
        assert greedy_init_cover(inst.actions) == [0, 1, 2, 3, 4]

    def test_pairs_of_three(self):
        # (1,1,0) first, then the lowest-index action covering arm 3: (1,0,1)
        a = build_msubsets(3, 2)
        cover = greedy_init_cover(a)
        assert [a.incidence[k].tolist() for k in cover] == [[1, 1, 0], [1, 0, 1]]

    def test_single_action(self):
        assert greedy_init_cover(build_msubsets(4, 4)) == [0]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_cover_pulls_every_arm(self, seed):
        r = np.random.default_rng(seed)
        d = int(r.integers(2, 8))
        m = int(r.integers(1, d + 1))
        all_actions = list(itertools.combinations(range(d), m))
        pick = r.permutation(len(all_actions))
        chosen = []
        covered = set()
        for k in pick:
            chosen.append(all_actions[k])
            covered |= set(all_actions[k])
            if len(covered) == d and r.random() < 0.5:
                break
        if len(covered) < d:
            return
        a = ActionSet.from_indices(d, m, chosen)
        pulls = np.zeros(d)
        for k in greedy_init_cover(a):
            pulls[list(a.indices[k])] += 1
        assert (pulls >= 1).all()


class TestGaps:
    def test_two_arm(self):
        inst = ProblemInstance(np.array([1.0, 0.0]), np.eye(2), ActionSet(2, 1, [[1, 0], [0, 1]]))
        g = compute_gaps(inst)
        np.testing.assert_array_equal(g.action_gaps, [0.0, 1.0])
        assert np.isnan(g.arm_min_gaps[0])
        assert g.arm_min_gaps[1] == 1.0
        assert g.delta_min == g.delta_max == 1.0

    def test_parallel_paths(self):
        inst = build_parallel_paths(2, 2, 0.0, 1.0, 0.3)
        assert inst.gaps.action_gaps[0] == 0.0
        assert inst.gaps.action_gaps[1] == pytest.approx(0.3, abs=1e-15)

    def test_constant_mean_degenerate(self):
        inst = ProblemInstance(np.full(3, 0.2), np.eye(3), build_msubsets(3, 2))
        g = inst.gaps
        assert (g.action_gaps == 0).all()
        assert g.degenerate and g.delta_min is None and g.delta_max is None
        assert np.isnan(g.arm_min_gaps).all()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            ProblemInstance(np.zeros(3), np.eye(2), build_msubsets(3, 1))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_min_gap_is_zero(self, seed):
        r = np.random.default_rng(seed)
        d = int(r.integers(2, 7))
        m = int(r.integers(1, d + 1))
        inst = ProblemInstance(r.normal(size=d), np.eye(d), build_msubsets(d, m))
        assert inst.gaps.action_gaps.min() == 0.0
        assert (inst.gaps.action_gaps >= 0).all()


class TestParallelPaths:
    def test_independent_case(self):
        inst = build_parallel_paths(2, 2, 0.0, 1.0, 0.5)
        np.testing.assert_array_equal(inst.cov.entries, np.eye(4))
        np.testing.assert_array_equal(inst.mu, [0, 0, -0.25, -0.25])
        np.testing.assert_array_equal(inst.gaps.action_gaps, [0.0, 0.5])

    def test_full_correlation_blocks(self):
        inst = build_parallel_paths(2, 2, 1.0)
        expected = np.zeros((4, 4))
        expected[:2, :2] = 1
        expected[2:, 2:] = 1
        np.testing.assert_array_equal(inst.cov.entries, expected)

    @pytest.mark.parametrize("n_paths,m", [(2, 1), (3, 2), (5, 3), (4, 5)])
    def test_partition(self, n_paths, m):
        inst = build_parallel_paths(n_paths, m, 0.3)
        arms = [i for a in inst.actions for i in a]
        assert sorted(arms) == list(range(n_paths * m))

    def test_sigma_scaling(self):
        inst = build_parallel_paths(2, 3, 0.4, sigma=2.0)
        assert inst.cov.entries[0, 0] == pytest.approx(4.0)
        assert inst.cov.entries[0, 1] == pytest.approx(1.6)

    def test_every_gap_equals_delta(self):
        inst = build_parallel_paths(5, 3, 0.2, 1.0, 1.0)
        np.testing.assert_allclose(inst.gaps.action_gaps[1:], 1.0, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("gamma", np.round(np.arange(0, 1.01, 0.1), 10))
    def test_psd_for_all_gamma(self, gamma):
        inst = build_parallel_paths(4, 3, float(gamma))
        validate_covariance(inst.cov.entries)

    @pytest.mark.parametrize("gamma", [-0.1, 1.5])
    def test_invalid_gamma(self, gamma):
        with pytest.raises(InvalidGamma):
            build_parallel_paths(3, 2, gamma)

    def test_needs_two_paths(self):
        with pytest.raises(InvalidActionSet):
            build_parallel_paths(1, 2, 0.0)

    def test_json_shape(self):
        obj = build_parallel_paths(2, 2, 0.5, 1.0, 0.5).to_json()
        assert set(obj) == {"d", "m", "mu", "cov", "actions", "sigma"}
        assert obj["actions"] == [[0, 1], [2, 3]]
