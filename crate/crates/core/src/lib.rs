//! Semantics-preserving word clouds laid out as nested Voronoi treemaps.

pub mod cluster;
pub mod corpus;
pub mod embeddings;
pub mod fontfit;
pub mod geometry;
pub mod pipeline;
pub mod render;
#[cfg(feature = "server")]
pub mod service;
pub mod semgraph;
pub mod treemap;
