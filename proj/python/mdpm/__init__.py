"""Mid-level pattern mining: association rules over patch activations.

Thin re-export of the compiled core. Thresholds are passed as decimal
strings ("0.6") so they are compared exactly.
"""

from ._mdpm import (
    BACKGROUND_LABEL,
    Detector,
    EmptyInputError,
    FeatureStore,
    FiringType,
    FormatError,
    IoError,
    LinearModel,
    MdpmError,
    MergedElement,
    MidLevelElement,
    PatchGeometry,
    Pattern,
    SingularMatrixError,
    SynthDataset,
    SynthSpec,
    TransactionDatabase,
    TruncationError,
    UndefinedError,
    ValidationError,
    accuracy,
    average_precision,
    build_database,
    classify_firing,
    confidence,
    encode_store_boe,
    encode_store_bop,
    generate_dataset,
    merge_category,
    mine_category,
    mine_rules,
    overlap_ratios,
    planted_recovery_report,
    read_featfile,
    retrieve_category,
    sample_patch_grid,
    select_top_patterns,
    support,
    top_k_indices,
    train_ovr,
    write_featfile,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
