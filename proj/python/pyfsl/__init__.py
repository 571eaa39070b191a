from ._pyfsl import (
    FormatError,
    FslError,
    cal_loss,
    classify,
    compute_prototypes,
    gen_synthetic,
    hard_vote,
    metrics,
    read_embedding_store,
    run_cli,
    soft_vote,
    write_embedding_store,
)

__all__ = [
    "FormatError",
    "FslError",
    "cal_loss",
    "classify",
    "compute_prototypes",
    "gen_synthetic",
    "hard_vote",
    "metrics",
    "read_embedding_store",
    "run_cli",
    "soft_vote",
    "write_embedding_store",
]
