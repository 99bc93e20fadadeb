//! Exact rank-metric computations on the finite special linear groups
//! SL_n(q) and on the levels of their dyadic inductive limit.

pub mod error;
pub mod bitmat;
pub mod field;
pub mod matgf;
pub mod embed;
pub mod groups;
pub mod concentration;
pub mod folner;

pub use error::{Error, Result};
pub use field::{Field, FieldCtx, Fq, PrimePower, QuadExt};
pub use folner::{AmenableGroup, FolnerSpec, GroupRingElement};
pub use matgf::{MatF, Rational, SlElement};
