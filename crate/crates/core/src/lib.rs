//! Finite, checkable machinery for subshifts of finite type over Z^d × G.

pub mod block_code;
pub mod clopen;
pub mod embed;
pub mod entropy;
pub mod enumerate;
pub mod error;
pub mod format;
pub mod group;
pub mod homotopy;
pub mod language;
pub mod markers;
pub mod oned;
pub mod overlap;
pub mod par;
pub mod pattern;
pub mod perron;
pub mod periodic;
pub mod retract;
pub mod sft;
pub mod subgroup;
pub mod tiling;

pub use error::{Error, Result};
pub use group::{FiniteSet, GroupElement, GroupSpec, MetricValue};
pub use language::{Exactness, Language};
pub use pattern::{Alphabet, Pattern, PatternTable};
pub use sft::SftSpec;
pub use subgroup::Subgroup;
