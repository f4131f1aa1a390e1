from app.core.types.rng import derive_seed, root_stream, sample_categorical, substream

__all__ = ["derive_seed", "root_stream", "sample_categorical", "substream"]
