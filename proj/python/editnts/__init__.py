"""Edit-program sentence simplification: oracle, executor, metrics and inference."""

from ._editnts import (
    CheckpointError,
    DataError,
    HaltedError,
    PointerOverflow,
    Simplifier,
    construct_program,
    count_syllables,
    execute,
    fkgl,
    label_counts,
    sari,
    sari_sentence,
    toy_corpus,
    validate,
)

__all__ = [
    "CheckpointError",
    "DataError",
    "HaltedError",
    "PointerOverflow",
    "Simplifier",
    "construct_program",
    "count_syllables",
    "execute",
    "fkgl",
    "label_counts",
    "sari",
    "sari_sentence",
    "toy_corpus",
    "validate",
]
