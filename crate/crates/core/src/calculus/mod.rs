//! Fields on polar grids and what can be measured on them.

pub mod estimators;
pub mod families;
pub mod field;
pub mod norms;
pub mod split;

pub use estimators::{morrey_quotient, poincare_ball_ratio, poincare_cap_ratio};
pub use families::{make_named_field, make_test_field, TestFamily};
pub use field::{gradient, Field, GradientField};
pub use norms::{
    divergence_table, hardy_quotient, hat_gate, lp_norm, sobolev_norm, DivergenceTable, NormKind,
    NormSpec, Weight,
};
pub use split::{even_odd_split, radial_split, radial_split_with, CapScope, RadialSplit};
