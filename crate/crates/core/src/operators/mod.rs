//! Operator-level compositions of the engine, memory and launch models.

pub mod attention;
pub mod embedding;

pub use attention::{
    paged_attention, paged_attention_cross_device, PagedAttentionConfig, PagedAttentionResult,
    Variant,
};
pub use embedding::{embedding_lookup, EmbeddingConfig, EmbeddingResult, Layout};
