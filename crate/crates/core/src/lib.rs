//! Triclustering of three-way tensors (observations × variables × contexts)
//! with objectives that combine pattern quality, discriminative power and
//! statistical significance.
//!
//! Everything numeric is generic over [`Scalar`]; the aliases below fix it
//! to `f64` or `f32`.

pub mod discrimination;
pub mod error;
pub mod evaluation;
pub mod mof;
pub mod num;
pub mod objective;
pub mod patterns;
pub mod quality;
pub mod significance;
pub mod solution;
pub mod synthetic;
pub mod tensor;
pub mod trigen;
pub mod trimax;

pub use error::{Error, Result};
pub use evaluation::{ScoredTricluster, SolutionSummary};
pub use mof::{MofConfig, MofMode};
pub use num::Scalar;
pub use objective::{Objective, ObjectiveConfig};
pub use patterns::{Tricluster, TriclusterPattern};
pub use quality::QualityMeasure;
pub use solution::{Algorithm, Solution, SolutionMeta};
pub use synthetic::PlantSpec;
pub use tensor::{ClassOutcome, Dataset};
pub use trigen::{run_trigen, TrigenConfig};
pub use trimax::{run_trimax, TrimaxConfig};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Pattern64 = TriclusterPattern<f64>;
pub type Pattern32 = TriclusterPattern<f32>;
pub type Solution64 = Solution<f64>;
pub type Solution32 = Solution<f32>;
pub type ScoredTricluster64 = ScoredTricluster<f64>;
pub type ScoredTricluster32 = ScoredTricluster<f32>;
