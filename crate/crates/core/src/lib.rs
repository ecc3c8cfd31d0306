//! Risk bounds for the sum of two ordered risks.
//!
//! Given marginals `F <=_st G`, the crate computes best- and worst-case
//! values of VaR, ES, RVaR, essential infimum/supremum and probability
//! levels of `X + Y` over all couplings with `X <= Y`, built around the
//! directional lower (DL) coupling.

pub mod bounds;
pub mod coupling;
pub mod dist;
pub mod error;
pub mod io;
mod numeric;
pub mod oracle;

pub use bounds::{BoundOptions, BoundReport, Levels, Measure};
pub use coupling::{CouplingKind, DlPlan, OrderedPair, SampleBatch};
pub use dist::{Dist, DistKind, OrderCheckReport};
pub use error::{Error, Result};
