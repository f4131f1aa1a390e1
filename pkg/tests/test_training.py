from pathlib import Path

import numpy as np
import pytest
from scipy.special import softmax

from app.config import RunConfig
from app.core.domain.dataset import DatasetRecord
from app.core.domain.denoiser import TABLE_NAMES, TabularDenoiser
from app.core.domain.tokens import NULL_CONDITION
from app.core.exceptions.common import InvalidParameterError
from app.core.exceptions.denoiser import TrainingDivergedError
from app.core.ports.denoiser import DenoiserQuery
from app.core.services.sampling_service import Sampler
from app.core.services.training_service import TrainingService, loss, train
from app.core.types.rng import substream
from tests.support.builders import random_model, random_records, small_codebook, small_transition
from tests.support.fakes.fake_repositories import FakeDatasetRepository, FakeDenoiserRepository

EPSILON = 1e-5


def _constant_records() -> list[DatasetRecord]:
    """Condition 1 is all token 0, condition 2 all token 3."""
    return [DatasetRecord(condition=c, tokens=np.full(5, 0 if c == 1 else 3)) for c in (1, 2) for _ in range(3)]


@pytest.mark.parametrize("draw", range(20))
def test_loss_gradient_matches_central_differences(draw):
    transition = small_transition(small_codebook(K=4, seed=draw), T=5, eta=1.0)
    model = random_model(transition, V=2, B=2, seed=draw, scale=0.5)
    batch = random_records(4, count=2, length=3, seed=draw)
    conditions = [NULL_CONDITION, 2] if draw % 2 else None

    def evaluate(m: TabularDenoiser):
        return loss(m, batch, transition, 0.3, np.random.default_rng(draw), conditions=conditions)

    analytic = evaluate(model).gradients
    for name in TABLE_NAMES:
        for index in np.ndindex(model.tables[name].shape):
            plus, minus = model.copy(), model.copy()
            plus.tables[name][index] += EPSILON
            minus.tables[name][index] -= EPSILON
            numeric = (evaluate(plus).value - evaluate(minus).value) / (2 * EPSILON)
            expected = analytic[name][index]
            assert abs(numeric - expected) <= 1e-4 * max(abs(numeric), abs(expected)) + 1e-9, (name, index)


@pytest.mark.parametrize("seed", range(10))
def test_loss_is_non_negative(seed):
    transition = small_transition(small_codebook(K=6, seed=seed), T=8)
    model = random_model(transition, seed=seed, scale=2.0)
    batch = random_records(6, count=4, length=5, seed=seed)

    result = loss(model, batch, transition, 0.5, np.random.default_rng(seed))

    assert result.vlb >= 0
    assert result.denoising >= 0
    assert result.value >= 0


def test_loss_without_coefficient_is_the_bound_term():
    transition = small_transition(small_codebook(K=5), T=6)
    model = random_model(transition, seed=1)
    batch = random_records(5, count=3, length=4, seed=1)

    result = loss(model, batch, transition, 0.0, np.random.default_rng(1))

    assert result.value == result.vlb


def test_loss_vanishes_for_a_certain_model():
    transition = small_transition(small_codebook(K=4), T=6)
    model = TabularDenoiser(V=1, B=3, K=4, T=6)
    model.tables["shared_current"][:, :, 2] = 60.0
    batch = [DatasetRecord(condition=1, tokens=np.full(6, 2))]

    for seed in range(5):
        assert loss(model, batch, transition, 5e-4, np.random.default_rng(seed)).value < 1e-9


def test_bound_term_covers_the_whole_chain():
    T = 4
    transition = small_transition(small_codebook(K=4), T=T)
    model = TabularDenoiser(V=1, B=2, K=4, T=T)
    # state-independent prediction: the t = 1 term is a plain cross-entropy
    logits = np.array([0.5, -1.0, 2.0, 0.0])
    model.tables["shared_current"][:] = logits
    tokens = np.array([2, 0, 1])
    seed = next(s for s in range(100) if np.random.default_rng(s).integers(1, T + 1, size=1)[0] == 1)

    result = loss(model, [DatasetRecord(condition=1, tokens=tokens)], transition, 0.0, np.random.default_rng(seed))

    expected = float(-np.sum(np.log(softmax(logits)[tokens])))
    assert result.denoising == pytest.approx(expected)
    assert result.vlb == pytest.approx(T * expected)


def test_loss_rejects_negative_coefficient():
    transition = small_transition(small_codebook(K=4), T=4)
    model = random_model(transition)

    with pytest.raises(InvalidParameterError):
        loss(model, random_records(4, count=1, length=2), transition, -0.1, np.random.default_rng(0))


def test_loss_rejects_empty_batch():
    transition = small_transition(small_codebook(K=4), T=4)

    with pytest.raises(InvalidParameterError, match="non-empty"):
        loss(random_model(transition), [], transition, 0.1, np.random.default_rng(0))


def test_train_lowers_the_fixed_noise_loss():
    transition = small_transition(small_codebook(K=4), T=6)
    model = TabularDenoiser(V=2, B=3, K=4, T=6)

    result = train(model, _constant_records(), transition, epochs=30, learning_rate=0.1, seed=3)

    assert len(result.curve) == 30
    assert result.final_loss < result.initial_loss


def test_train_is_deterministic_per_seed():
    transition = small_transition(small_codebook(K=5), T=8)
    records = random_records(5, count=6, length=4, seed=2)

    first = train(TabularDenoiser(V=2, B=4, K=5, T=8), records, transition, epochs=5, learning_rate=0.3, seed=9)
    second = train(TabularDenoiser(V=2, B=4, K=5, T=8), records, transition, epochs=5, learning_rate=0.3, seed=9)

    assert first.model.same_tables(second.model)
    assert first.curve == second.curve


def test_train_with_full_dropout_never_touches_condition_tables():
    transition = small_transition(small_codebook(K=4), T=6)
    model = TabularDenoiser(V=2, B=3, K=4, T=6)

    train(model, _constant_records(), transition, epochs=10, learning_rate=0.5, null_prob=1.0, seed=0)

    query = DenoiserQuery.from_batch([np.full(5, 4)], [1], [6], K=4)
    assert np.array_equal(model.predict(query), model.predict(query.unconditional()))
    assert not np.any(model.tables["cond_current"])


def test_conditional_predictions_beat_unconditional_ones():
    transition = small_transition(small_codebook(K=4), T=6)
    model = TabularDenoiser(V=2, B=3, K=4, T=6)
    records = _constant_records()

    train(model, records, transition, epochs=60, learning_rate=0.1, seed=1)

    query = DenoiserQuery.from_batch([np.full(5, 4)] * 2, [1, 2], [6, 6], K=4)
    truth = np.repeat([0, 3], 5)
    rows = np.arange(10)
    conditional = model.predict(query)[rows, truth]
    unconditional = model.predict(query.unconditional())[rows, truth]
    assert conditional.mean() > unconditional.mean()


def test_single_sequence_is_memorised_with_default_settings():
    config = RunConfig()
    schedule, training = config.schedule, config.training
    transition = small_transition(
        small_codebook(K=8),
        T=schedule.steps,
        eta=schedule.eta_single,
        gamma_max=schedule.gamma_max,
        alpha_min=schedule.alpha_min,
    )
    model = TabularDenoiser(V=1, B=training.buckets, K=8, T=schedule.steps)
    target = np.arange(6)

    train(
        model,
        [DatasetRecord(condition=1, tokens=target)],
        transition,
        epochs=training.epochs,
        learning_rate=training.learning_rate,
        loss_coefficient=training.loss_coefficient,
        null_prob=training.null_prob,
        seed=4,
    )

    sampler = Sampler(transition, model)
    for s in (0.0, config.sampler.guidance_single):
        hits = sum(
            np.array_equal(sampler.generate_single(1, 6, s, substream(seed, 0)).states, target)
            for seed in range(100)
        )
        assert hits >= 90, s


def test_train_reports_the_diverging_epoch():
    transition = small_transition(small_codebook(K=4), T=4)
    model = TabularDenoiser(V=1, B=2, K=4, T=4)
    model.tables["shared_current"][:] = np.nan

    with pytest.raises(TrainingDivergedError) as excinfo:
        train(model, random_records(4, count=2, length=3, conditions=1), transition, epochs=3, learning_rate=0.1)

    assert excinfo.value.epoch == 1


@pytest.mark.parametrize("null_prob", [-0.1, 1.5])
def test_train_rejects_invalid_dropout(null_prob):
    transition = small_transition(small_codebook(K=4), T=4)

    with pytest.raises(InvalidParameterError):
        train(
            TabularDenoiser(V=1, B=2, K=4, T=4),
            random_records(4, count=1, length=2, conditions=1),
            transition,
            epochs=1,
            learning_rate=0.1,
            null_prob=null_prob,
        )


def test_training_service_saves_the_fitted_model():
    transition = small_transition(small_codebook(K=4), T=6)
    datasets, models = FakeDatasetRepository(), FakeDenoiserRepository()
    datasets.save(_constant_records(), Path("data.jsonl"))
    service = TrainingService(dataset_repo=datasets, model_repo=models)

    result = service.fit(
        dataset_path=Path("data.jsonl"),
        model_path=Path("model.txt"),
        transition=transition,
        conditions=2,
        buckets=10,
        epochs=4,
        learning_rate=0.5,
        null_prob=0.1,
        loss_coefficient=5e-4,
        seed=0,
    )

    saved = models.load(Path("model.txt"))
    assert saved.B == 6
    assert saved.same_tables(result.model)
    assert len(result.curve) == 4
