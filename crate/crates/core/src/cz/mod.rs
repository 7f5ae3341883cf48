//! Calderón–Zygmund decomposition of first-order Sobolev data on a planar cone.

pub mod balls;
pub mod decompose;
pub mod kfunc;
pub mod maximal;
pub mod verify;

pub use decompose::{decompose, decompose_with_maximal, BallType, CzParams, CzResult, WhitneyBall};
pub use kfunc::{glue_good_parts, weighted_l1, weighted_sup, CzKFunctional, KUpperPoint};
pub use maximal::{cz_integrand, maximal_function};
pub use verify::{verify, CzReport};
