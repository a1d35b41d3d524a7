"""Taxonomy-aware contrastive learning core, exposed from the C++ library."""

from ._reco import (
    ConfigError,
    DataError,
    NumericDivergence,
    RecoError,
    ConceptNode,
    Normalization,
    Objective,
    Taxonomy,
    SimilarityTable,
    LossResult,
    SynthSpec,
    SynthDataset,
    TrainConfig,
    TrainResult,
    Encoder,
    LinearClassifier,
    ProbeResult,
    RelativeReport,
    raw_similarity,
    similarity_table,
    info_nce,
    supcon,
    paco,
    reco_loss,
    combined,
    acceptance_matrix,
    draw_mask,
    keyed_uniform,
    generate,
    train,
    lr_at,
    fit_linear_probe,
    evaluate,
    probe_realms,
    relative_report,
    read_results_csv,
    taxonomy_alignment,
    class_cosine_matrix,
    filter_concepts,
    select_realms,
    dhash,
    hash_hex,
    dedup,
)

__all__ = [name for name in dir() if not name.startswith("_")]
