"""
Domain 模型與持久化 Schema 之間的轉換器
"""
import numpy as np

from app.core.domain.dataset import DatasetRecord
from app.core.domain.generation import GeneratedSequence
from app.core.domain.tokens import TokenSequence
from app.core.services.metrics_service import EvaluationRecord
from app.infra.storage.schemas import DatasetRecordSchema, EvaluationRecordSchema, TokenRecordSchema


def dataset_record_to_schema(record: DatasetRecord) -> DatasetRecordSchema:
    return DatasetRecordSchema(condition=record.condition, tokens=record.tokens.tolist())


def dataset_record_from_schema(schema: DatasetRecordSchema) -> DatasetRecord:
    return DatasetRecord(condition=schema.condition, tokens=np.asarray(schema.tokens, dtype=np.int64))


def token_record_to_schema(record: GeneratedSequence) -> TokenRecordSchema:
    seq = record.sequence
    return TokenRecordSchema(
        seed=record.seed,
        plan_digest=record.plan_digest,
        mask_id=seq.mask_id,
        boundaries=list(seq.boundaries),
        conditions=record.segment_conditions,
        tokens=seq.states.tolist(),
        step=record.step,
        source=None if record.source is None else np.asarray(record.source).tolist(),
    )


def token_record_from_schema(schema: TokenRecordSchema) -> GeneratedSequence:
    """
    將紀錄還原為 GeneratedSequence

    :raises InvalidParameterError: 分段與條件數量不一致或狀態超出範圍
    """
    lengths = np.diff(schema.boundaries)
    conditions = np.repeat(np.asarray(schema.conditions, dtype=np.int64), lengths)
    sequence = TokenSequence(
        states=np.asarray(schema.tokens, dtype=np.int64),
        conditions=conditions,
        boundaries=tuple(schema.boundaries),
        mask_id=schema.mask_id,
    )
    source = None if schema.source is None else np.asarray(schema.source, dtype=np.int64)
    return GeneratedSequence(
        sequence=sequence,
        seed=schema.seed,
        plan_digest=schema.plan_digest,
        step=schema.step,
        source=source,
    )


def evaluation_record_to_schema(record: EvaluationRecord) -> EvaluationRecordSchema:
    return EvaluationRecordSchema(
        metric=record.metric,
        value=record.value,
        sequence=record.sequence,
        window=record.window,
        parameters=record.parameters,
    )
