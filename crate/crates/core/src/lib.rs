//! Union, intersection and difference over declarative visualization
//! specifications, computed on a lossless relational representation, plus
//! the analyses built on them: weighted distances, embeddings, genealogy,
//! sequencing and three-way version merge.

pub mod analysis;
pub mod bench;
pub mod operators;
pub mod relational;
pub mod spec;
pub mod value;

pub use relational::{from_spec, to_spec, RelViz};
pub use spec::{parse_spec, serialize_spec, VizSpec};
