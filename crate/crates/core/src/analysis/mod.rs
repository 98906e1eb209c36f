//! Operations built on the binary operators: weighted distances and their
//! matrices, classical MDS, nearest-neighbour queries, the subset
//! genealogy, sequencing, shortest paths and three-way version merge.

mod distance;
mod genealogy;
mod mds;
mod merge;
mod paths;
mod weights;

use thiserror::Error;

pub use distance::{distance, distance_matrix, nearest, DistanceMatrix};
pub use genealogy::{genealogy, is_style_subset, GenealogyGraph, GenealogyNode};
pub use mds::{jacobi_eigen, mds_embed, Embedding, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE};
pub use merge::{
    merge_versions, Conflict, ConflictReport, MergeOutcome, VersionGraph, VersionNode,
};
pub use paths::{sequence, shortest_path};
pub use weights::{category, Category, WeightConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("degenerate distance matrix: {0}")]
    DegenerateMatrix(String),
    #[error("embedding dimension must be at least 1")]
    InvalidDimension,
    #[error("index {index} out of range for {len} items")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("weight config: {0}")]
    Config(String),
    #[error("unknown version `{0}`")]
    UnknownVersion(String),
    #[error(transparent)]
    Operator(#[from] crate::operators::OpError),
}
