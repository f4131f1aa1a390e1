import itertools

import numpy as np
import pytest
from scipy.special import softmax

from app.core.domain.codebook import Codebook
from app.core.domain.schedule import NoiseSchedule
from app.core.domain.tokens import TokenSequence
from app.core.exceptions.common import InvalidParameterError, InvalidStateError
from app.core.exceptions.schedule import ScheduleError, UnreachableStateError
from app.core.services.codebook_service import distance_rank_matrix
from app.core.services.schedule_service import (
    TransitionModel,
    build_schedule,
    dynamic_transition_matrix,
    render_audit,
    uniform_transition_matrix,
)
from tests.support.builders import small_codebook, small_transition


def _line(*positions: float) -> Codebook:
    return Codebook(entries=np.array(positions, dtype=float)[:, None])


def test_build_schedule_linear_endpoints():
    sched = build_schedule(100, gamma_max=0.9, alpha_min=1e-4)

    assert sched.T == 100
    assert sched.alpha_bar[100] == pytest.approx(1e-4, abs=1e-12)
    assert sched.gamma_bar[100] == pytest.approx(0.9, abs=1e-12)


def test_build_schedule_single_step_closed_form():
    sched = build_schedule(1, gamma_max=0.5, alpha_min=0.25)

    assert sched.alpha[1] == pytest.approx(0.25)
    assert sched.gamma[1] == pytest.approx(0.5)
    assert sched.residual(1) == pytest.approx(0.25)


@pytest.mark.parametrize("T, gamma_max, alpha_min", [(100, 0.9, 1e-4), (7, 0.3, 0.5), (20, 0.99, 1e-3)])
def test_build_schedule_per_step_product_recovers_cumulative(T, gamma_max, alpha_min):
    sched = build_schedule(T, gamma_max, alpha_min)

    assert np.allclose(np.cumprod(sched.alpha), sched.alpha_bar, rtol=0, atol=1e-12)
    assert np.allclose(1 - np.cumprod(1 - sched.gamma), sched.gamma_bar, rtol=0, atol=1e-12)
    assert np.all(1 - sched.alpha[1:] - sched.gamma[1:] >= 0)


@pytest.mark.parametrize(
    "T, gamma_max, alpha_min",
    [(0, 0.9, 1e-4), (10, 1.0, 1e-4), (10, 0.0, 1e-4), (10, 0.9, 0.1), (10, 0.5, 0.0)],
)
def test_build_schedule_rejects_invalid_parameters(T, gamma_max, alpha_min):
    with pytest.raises(InvalidParameterError):
        build_schedule(T, gamma_max, alpha_min)


def test_schedule_error_names_the_step():
    exc = ScheduleError(7, -0.01)

    assert exc.t == 7
    assert "t=7" in exc.message
    assert exc.error_code == "INFEASIBLE_SCHEDULE"


def test_uniform_matrix_arithmetic():
    sched = NoiseSchedule.from_steps([0.7], [0.1])

    q = uniform_transition_matrix(sched, 1, K=3).values

    beta = 0.2 / 3
    assert q[0, 1] == pytest.approx(beta, abs=1e-15)
    assert q[1, 1] == pytest.approx(0.7 + beta, abs=1e-15)
    assert np.allclose(q[3, :3], 0.1)
    assert np.allclose(q.sum(axis=0), 1.0, atol=1e-12, rtol=0)


def test_uniform_matrix_without_noise_is_identity_on_tokens():
    sched = NoiseSchedule.from_steps([1.0], [0.0])

    q = uniform_transition_matrix(sched, 1, K=4).values

    assert np.array_equal(q, np.eye(5))


def test_uniform_matrix_mask_column_is_absorbing():
    sched = build_schedule(10, 0.9, 1e-4)

    for t in range(1, 11):
        assert uniform_transition_matrix(sched, t, K=5).is_absorbing()


def test_dynamic_matrix_with_zero_eta_equals_uniform():
    cb = small_codebook(K=9)
    sched = build_schedule(20, 0.9, 1e-4, eta=0.0)
    ranks = distance_rank_matrix(cb)

    for t in (1, 10, 20):
        dynamic = dynamic_transition_matrix(sched, t, ranks).values
        uniform = uniform_transition_matrix(sched, t, cb.K).values
        assert np.max(np.abs(dynamic - uniform)) <= 1e-12


def test_dynamic_matrix_favours_distant_tokens_late():
    cb = small_codebook(K=9)
    sched = build_schedule(20, 0.9, 1e-4, eta=3.0)
    ranks = distance_rank_matrix(cb)

    q = dynamic_transition_matrix(sched, 20, ranks).values

    for j in range(cb.K):
        nearest = q[ranks.ranks[:, j] == 1, j][0] - sched.alpha[20]
        farthest = q[ranks.ranks[:, j] == cb.K, j][0]
        assert farthest > nearest


def test_dynamic_matrix_hand_computed_softmax():
    sched = NoiseSchedule.from_steps([0.7], [0.1], eta=1.0)
    ranks = distance_rank_matrix(_line(0.0, 1.0, 3.0))

    q = dynamic_transition_matrix(sched, 1, ranks).values

    beta = 0.2 * softmax(np.array([1 / 3, 2 / 3, 1.0]))
    assert q[:3, 0] == pytest.approx([0.7 + beta[0], beta[1], beta[2]], abs=1e-15)
    assert q[:3, 2] == pytest.approx([beta[2], beta[1], 0.7 + beta[0]], abs=1e-15)
    assert q[:, 0].sum() == pytest.approx(1.0, abs=1e-12)


def test_cumulative_first_step_equals_step_matrix():
    transition = small_transition(small_codebook(K=5), T=6)

    assert np.array_equal(transition.cumulative_matrix(1).values, transition.step_matrix(1).values)
    assert np.array_equal(transition.cumulative_matrix(0).values, np.eye(6))


def test_uniform_cumulative_matches_closed_form():
    K = 7
    transition = TransitionModel(build_schedule(30, 0.9, 1e-4), K)
    sched = transition.schedule

    for t in (1, 5, 17, 30):
        a, g = sched.alpha_bar[t], sched.gamma_bar[t]
        expected = np.zeros((K + 1, K + 1))
        expected[:K, :K] = (1 - a - g) / K
        expected[np.arange(K), np.arange(K)] += a
        expected[K, :K] = g
        expected[K, K] = 1.0
        assert np.max(np.abs(transition.cumulative_matrix(t).values - expected)) <= 1e-10


def test_cumulative_mask_row_reaches_gamma_max():
    transition = small_transition(small_codebook(K=6), T=100, eta=2.0)

    assert np.allclose(transition.cumulative_matrix(100).mask_row, 0.9, atol=1e-10, rtol=0)


ETA_CHOICES = (0.0, 0.25, 0.5, 1.0)


@pytest.mark.parametrize("seed", range(50))
def test_transition_matrices_are_column_stochastic_and_absorbing(seed):
    rng = np.random.default_rng(seed)
    K = int(rng.integers(2, 17))
    T = int(rng.integers(1, 21))
    gamma_max = float(rng.uniform(0.05, 0.95))
    alpha_min = float(rng.uniform(1e-5, 1 - gamma_max - 1e-3))
    dynamic = bool(seed % 2)
    transition = small_transition(
        small_codebook(K=K, seed=seed),
        T=T,
        eta=float(rng.choice(ETA_CHOICES)),
        dynamic=dynamic,
        gamma_max=gamma_max,
        alpha_min=alpha_min,
    )
    sched = transition.schedule

    previous_mask = 0.0
    for t in range(1, T + 1):
        step = transition.step_matrix(t)
        cumulative = transition.cumulative_matrix(t)
        assert step.column_deviation() <= 1e-12
        assert cumulative.column_deviation() <= 1e-10
        assert np.all(step.values >= 0) and np.all(step.values <= 1)
        assert step.is_absorbing() and cumulative.is_absorbing()
        assert np.allclose(step.mask_row, sched.gamma[t], atol=1e-15, rtol=0)
        if dynamic:
            assert np.all(cumulative.mask_row >= previous_mask - 1e-15)
            previous_mask = cumulative.mask_row.min()
        else:
            assert np.allclose(cumulative.mask_row, sched.gamma_bar[t], atol=1e-12, rtol=0)


def test_dynamic_approaches_uniform_as_eta_vanishes():
    cb = small_codebook(K=12)
    dynamic = small_transition(cb, T=15, eta=1e-8)
    uniform = small_transition(cb, T=15, eta=1e-8, dynamic=False)

    for t in range(1, 16):
        gap = np.max(np.abs(dynamic.step_matrix(t).values - uniform.step_matrix(t).values))
        assert gap <= 1e-7


def test_forward_sample_masks_almost_everything_at_the_last_step():
    cb = small_codebook(K=6)
    transition = small_transition(cb, T=10, gamma_max=0.99, alpha_min=1e-4)
    z0 = TokenSequence.single(np.arange(10_000) % cb.K, condition=1, mask_id=cb.mask_id)

    z_t = transition.forward_sample(z0, 10, np.random.default_rng(0))

    assert z_t.mask_count() / len(z_t) >= 0.95


def test_forward_sample_identity_chain_keeps_tokens():
    sched = NoiseSchedule.from_steps(np.ones(5), np.zeros(5))
    transition = TransitionModel(sched, 4)
    z0 = TokenSequence.single([0, 3, 1, 2, 2], condition=1, mask_id=4)

    z_t = transition.forward_sample(z0, 5, np.random.default_rng(1))

    assert z_t.same_as(z0)


def test_forward_sample_frequencies_match_cumulative_column():
    cb = small_codebook(K=6)
    transition = small_transition(cb, T=10, eta=2.0)
    draws = 100_000
    z0 = TokenSequence.single(np.full(draws, 2), condition=1, mask_id=cb.mask_id)

    z_t = transition.forward_sample(z0, 5, np.random.default_rng(2))

    expected = transition.cumulative_matrix(5).values[:, 2]
    counts = np.bincount(z_t.states, minlength=cb.K + 1)
    sigma = np.sqrt(draws * expected * (1 - expected))
    assert np.all(np.abs(counts - draws * expected) <= 4 * sigma + 1)


def test_forward_sample_rejects_mask_input():
    cb = small_codebook(K=4)
    transition = small_transition(cb, T=5)
    z0 = TokenSequence.single([0, cb.mask_id], condition=1, mask_id=cb.mask_id)

    with pytest.raises(InvalidStateError):
        transition.forward_sample(z0, 3, np.random.default_rng(0))


def test_posterior_at_first_step_is_point_mass_on_clean_token():
    transition = small_transition(small_codebook(K=5), T=8)

    for z_t in (0, 3, transition.mask_id):
        post = transition.posterior(z_t, 3, 1)
        expected = np.zeros(6)
        expected[3] = 1.0
        assert np.allclose(post, expected, atol=1e-12, rtol=0)


def _enumerated_posterior(transition: TransitionModel, z_t: int, z0: int, t: int) -> np.ndarray | None:
    """Bayes over every chain z_1..z_t starting at z0."""
    states = transition.K + 1
    q = transition.step_stack
    joint = np.zeros(states)
    for path in itertools.product(range(states), repeat=t):
        chain = (z0,) + path
        if chain[-1] != z_t:
            continue
        prob = 1.0
        for s in range(1, t + 1):
            prob *= q[s, chain[s], chain[s - 1]]
        joint[chain[-2]] += prob
    if joint.sum() < 1e-300:
        return None
    return joint / joint.sum()


@pytest.mark.parametrize("dynamic", [False, True])
@pytest.mark.parametrize("K, T", [(3, 2), (4, 3), (5, 3)])
def test_posterior_matches_exhaustive_enumeration(K, T, dynamic):
    transition = small_transition(small_codebook(K=K, seed=K), T=T, eta=1.5, dynamic=dynamic)

    for t in range(1, T + 1):
        for z0 in range(K):
            for z_t in range(K + 1):
                expected = _enumerated_posterior(transition, z_t, z0, t)
                if expected is None:
                    continue
                post = transition.posterior(z_t, z0, t)
                assert post.sum() == pytest.approx(1.0, abs=1e-12)
                assert np.max(np.abs(post - expected)) <= 1e-10


def test_posterior_from_mask_spreads_over_mask_and_clean_token():
    transition = small_transition(small_codebook(K=6), T=50)

    post = transition.posterior(transition.mask_id, 2, 40)

    assert post[transition.mask_id] > 0
    assert post[2] > 0
    assert post.sum() == pytest.approx(1.0, abs=1e-12)


def test_posterior_raises_when_state_is_unreachable():
    transition = TransitionModel(NoiseSchedule.from_steps(np.ones(3), np.zeros(3)), 4)

    with pytest.raises(UnreachableStateError):
        transition.posterior(1, 0, 2)


def test_posterior_many_agrees_with_scalar_posterior():
    transition = small_transition(small_codebook(K=5), T=9)
    rng = np.random.default_rng(3)
    z0 = rng.integers(0, 5, size=40)
    steps = rng.integers(1, 10, size=40)
    z_t = transition.forward_sample_many(z0, steps, rng)

    batch = transition.posterior_many(z_t, z0, steps)

    for p in range(40):
        assert np.allclose(batch[p], transition.posterior(int(z_t[p]), int(z0[p]), int(steps[p])), atol=1e-15)


def test_audit_rows_and_rendering():
    transition = small_transition(small_codebook(K=6), T=10)

    rows = transition.audit_rows()
    table = render_audit(rows)

    assert [r.t for r in rows] == list(range(1, 11))
    assert max(r.step_deviation for r in rows) <= 1e-12
    assert rows[-1].mask_mass == pytest.approx(0.9, abs=1e-10)
    assert all(r.beta_min >= 0 and r.beta_max >= r.beta_min for r in rows)
    lines = table.splitlines()
    assert lines[0].split() == ["t", "step_dev", "cum_dev", "mask_mass", "beta_min", "beta_max"]
    assert len(lines) == 11
