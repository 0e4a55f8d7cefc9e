//! Causal discovery over the canonical incidence matrix.
//!
//! Three families are provided: constraint-based [`pc`] with a stratified G²
//! test, score-based [`ges`] over equivalence classes, and the linear
//! non-Gaussian models [`direct_lingam`] and [`ica_lingam`]. The LiNGAM
//! estimators treat binary columns as reals, which violates their
//! continuity assumptions; results on incidence data are exploratory.

mod ci;
mod ges;
mod graph;
mod lingam;
mod meek;
mod pc;
mod score;

pub use ci::{ci_test, gsq_ci_test, CiOracle, CiResult, CiStatistic, CiTest, DSeparation, DataCiTest, MIN_STRATUM};
pub use ges::{ges, GesResult};
pub use graph::{Cpdag, Dag, WeightedDag};
pub use lingam::{
    causal_order_from_b, direct_lingam, fast_ica, ica_lingam, IcaLingamResult, IcaOptions, LingamOptions,
    DEFAULT_PRUNE,
};
pub use meek::meek_orient;
pub use pc::{pc, PcResult, DEFAULT_MAX_COND};
pub use score::{DecomposableScore, ScoreKind};
